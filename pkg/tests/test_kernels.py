"""The compiled and pure-Python backends must agree bit for bit."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bf_influence, bf_min_tree_size, truth_tables
from topdown_dt import _kernels_py as py
from topdown_dt import kernels
from topdown_dt.boolfn import TruthTable

BACKENDS = kernels.backends()
compiled = BACKENDS.get("compiled")
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


class TestSelection:
    def test_backend_name(self):
        assert kernels.BACKEND in ("compiled", "python")
        assert "python" in BACKENDS

    def test_pure_env_forces_python(self):
        import subprocess
        import sys

        out = subprocess.run(
            [sys.executable, "-c", "from topdown_dt import kernels; print(kernels.BACKEND)"],
            env={"TOPDOWN_DT_PURE": "1", "PATH": ""},
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "python"


@needs_compiled
class TestAgreement:
    @given(truth_tables(min_n=0, max_n=10))
    def test_table_kernels(self, f):
        for name in ("influence_counts", "cofactor_counts", "relevant_mask", "is_monotone"):
            assert getattr(compiled, name)(f.bits, f.n) == getattr(py, name)(f.bits, f.n), name

    @given(truth_tables(min_n=1, max_n=10), st.data())
    def test_restrict(self, f, data):
        i = data.draw(st.integers(1, f.n))
        b = data.draw(st.integers(0, 1))
        assert compiled.restrict(f.bits, f.n, i, b) == py.restrict(f.bits, f.n, i, b)

    @pytest.mark.parametrize("n", [7, 8, 13, 16])
    def test_word_boundaries(self, n):
        rnd = random.Random(n)
        bits = rnd.getrandbits(1 << n)
        assert compiled.influence_counts(bits, n) == py.influence_counts(bits, n)
        for i in (1, 6, 7, n):
            for b in (0, 1):
                assert compiled.restrict(bits, n, i, b) == py.restrict(bits, n, i, b)

    @given(truth_tables(min_n=0, max_n=5))
    def test_oracle(self, f):
        assert compiled.optimal_size(f.bits, f.n) == py.optimal_size(f.bits, f.n)
        assert compiled.optimal_depth(f.bits, f.n) == py.optimal_depth(f.bits, f.n)


class TestPureKernels:
    @given(truth_tables(min_n=1, max_n=7))
    def test_influence_counts_brute_force(self, f):
        counts = py.influence_counts(f.bits, f.n)
        for i, c in enumerate(counts, start=1):
            assert c * 2 == bf_influence(f, i) * f.size

    @given(truth_tables(min_n=0, max_n=4))
    def test_oracle_brute_force(self, f):
        assert py.optimal_size(f.bits, f.n) == bf_min_tree_size(f)

    def test_oracle_arity_limit(self):
        with pytest.raises(ValueError):
            kernels.optimal_size(0, kernels.ORACLE_MAX_N + 1)

    def test_find_core_constant_sample(self):
        # two entries with the same label: a single leaf, one call
        tree, calls, peak = py.find_core(0b11, 4, 2, 1, [0, 0b10], 0b11, [0b11])
        assert tree == ("leaf", 1) and calls == 1 and peak == 1
