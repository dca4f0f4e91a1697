"""Parity between the compiled kernel and the NumPy fallback."""
import os
import subprocess
import sys

import numpy as np
import pytest

from twqkd import _kernel_py, tmsv_covariance

try:
    from twqkd import _kernel as _kernel_cy
except ImportError:
    _kernel_cy = None

needs_extension = pytest.mark.skipif(_kernel_cy is None, reason="compiled kernel not built")

from conftest import random_physical_state


def xp_of(gamma):
    m = gamma.matrix
    return np.ascontiguousarray(m[0::2, 0::2]), np.ascontiguousarray(m[1::2, 1::2])


class TestPythonKernel:
    def test_g_entropy_values(self):
        assert _kernel_py.g_entropy(1.0) == 0.0
        assert _kernel_py.g_entropy(3.0) == pytest.approx(2.0, abs=1e-15)

    def test_sympeig_tmsv_clamps_to_one(self):
        x, p = xp_of(tmsv_covariance(40.0))
        nus = _kernel_py.sympeig_xp(x, p)
        assert list(nus) == [1.0, 1.0]

    def test_sympeig_thermal(self):
        x = np.diag([5.0, 2.0])
        nus = _kernel_py.sympeig_xp(x, x.copy())
        assert np.allclose(nus, [5.0, 2.0], rtol=1e-13)


@needs_extension
class TestBackendParity:
    def test_g_entropy_grid(self):
        for nu in np.concatenate([[1.0, 1.0 + 1e-13], np.linspace(1.0, 80.0, 300)]):
            assert _kernel_cy.g_entropy(float(nu)) == pytest.approx(
                _kernel_py.g_entropy(float(nu)), abs=1e-14, rel=1e-13
            )

    def test_g_sum(self, rng):
        nus = np.ascontiguousarray(1.0 + rng.uniform(0.0, 20.0, size=7))
        assert _kernel_cy.g_sum(nus) == pytest.approx(_kernel_py.g_sum(nus), rel=1e-13)

    def test_sympeig_random_states(self, rng):
        for n_modes in (1, 2, 3, 4, 5):
            for _ in range(20):
                x, p = xp_of(random_physical_state(n_modes, rng))
                ref = _kernel_py.sympeig_xp(x, p)
                got = _kernel_cy.sympeig_xp(x, p)
                assert np.allclose(got, ref, rtol=1e-10, atol=1e-11)

    def test_sympeig_tmsv(self):
        x, p = xp_of(tmsv_covariance(25.0))
        assert list(_kernel_cy.sympeig_xp(x, p)) == [1.0, 1.0]

    def test_non_positive_definite_rejected(self):
        bad = np.diag([-1.0, 1.0])
        with pytest.raises(ValueError):
            _kernel_cy.sympeig_xp(bad, np.eye(2))
        with pytest.raises(np.linalg.LinAlgError):
            _kernel_py.sympeig_xp(bad, np.eye(2))

    def test_oversized_block_rejected(self):
        big = np.eye(17)
        with pytest.raises(ValueError):
            _kernel_cy.sympeig_xp(big, big.copy())


class TestBackendSelection:
    def test_forced_python_fallback(self):
        out = subprocess.run(
            [sys.executable, "-c", "import twqkd; print(twqkd.backend_name())"],
            env={**os.environ, "TWQKD_FORCE_PYTHON": "1"},
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "python"

    @needs_extension
    def test_default_prefers_extension(self):
        env = {k: v for k, v in os.environ.items() if k != "TWQKD_FORCE_PYTHON"}
        out = subprocess.run(
            [sys.executable, "-c", "import twqkd; print(twqkd.backend_name())"],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        assert out.stdout.strip() == "cython"

    def test_rates_agree_across_backends(self):
        # full pipeline under the fallback must match the in-process backend
        code = (
            "from conftest import paper_config\n"
            "from twqkd import two_way_key_rate, SubtractionSpec\n"
            "cfg = paper_config(distance_km=42.0, alice_sub=SubtractionSpec(1, 0.85))\n"
            "print(repr(two_way_key_rate(cfg).k_ps))\n"
        )
        here = os.path.dirname(__file__)
        out = subprocess.run(
            [sys.executable, "-c", code],
            env={**os.environ, "TWQKD_FORCE_PYTHON": "1", "PYTHONPATH": here},
            capture_output=True,
            text=True,
            check=True,
        )
        from twqkd import SubtractionSpec, two_way_key_rate

        from conftest import paper_config

        cfg = paper_config(distance_km=42.0, alice_sub=SubtractionSpec(1, 0.85))
        assert float(out.stdout.strip()) == pytest.approx(
            two_way_key_rate(cfg).k_ps, rel=1e-10
        )
