import numpy as np
import pytest

from tpaopt import absorption
from tpaopt.model import Atom, InvalidRateError, TimeWindow, dimensionless
from tpaopt.states import GaussianProduct


def test_dimensionless_scaling():
    a = dimensionless(Atom(2.0, 2.0))
    assert (a.gamma_e, a.gamma_f, a.delta1, a.delta2) == (1.0, 1.0, 0.0, 0.0)


def test_dimensionless_identity_when_gamma_f_is_one():
    a = Atom(5.0, 1.0)
    assert dimensionless(a) == a


def test_dimensionless_divides_detunings():
    a = dimensionless(Atom(1.0, 4.0, delta1=2.0))
    assert (a.gamma_e, a.gamma_f, a.delta1) == (0.25, 1.0, 0.5)


@pytest.mark.parametrize("ge,gf", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_invalid_rates_rejected(ge, gf):
    with pytest.raises(InvalidRateError):
        Atom(ge, gf)


def test_nonfinite_rejected():
    with pytest.raises(InvalidRateError):
        Atom(1.0, 1.0, delta1=np.inf)


def test_time_window_validation():
    with pytest.raises(ValueError):
        TimeWindow(1.0, 1.0)
    with pytest.raises(ValueError):
        TimeWindow(0.0, 1.0, n_samples=1)
    w = TimeWindow(-1.0, 1.0, 5)
    assert w.grid().shape == (5,)
    assert w.span == 2.0


def test_scale_invariance_of_probability():
    # rescaling gamma_f -> 1 with correspondingly rescaled pulse widths,
    # delay, and evaluation time leaves the probability unchanged
    atom = Atom(3.0, 2.0, 0.8, -0.4)
    state = GaussianProduct(1.4, 2.6, 0.7)
    t = 1.3
    p_raw = absorption.pf_at(atom, state, t)

    s = atom.gamma_f
    atom_r = dimensionless(atom)
    state_r = GaussianProduct(1.4 / s, 2.6 / s, 0.7 * s)
    p_scaled = absorption.pf_at(atom_r, state_r, t * s)
    assert p_raw == pytest.approx(p_scaled, rel=1e-9)


def test_scale_invariance_of_coherent_probability():
    from tpaopt.coherent import CoherentDrive, pf_max_coherent
    atom = Atom(1.5, 3.0, 0.6, -0.9)
    drive = CoherentDrive(1.0, 1.0, 2.1, 3.9, 0.4)
    tight = dict(rtol=1e-11, atol=1e-13)
    tm, pm = pf_max_coherent(atom, drive, **tight)

    s = atom.gamma_f
    atom_r = dimensionless(atom)
    drive_r = CoherentDrive(1.0, 1.0, 2.1 / s, 3.9 / s, 0.4 * s)
    tm_r, pm_r = pf_max_coherent(atom_r, drive_r, **tight)
    assert pm == pytest.approx(pm_r, rel=1e-9)
    assert tm * s == pytest.approx(tm_r, abs=2e-6)
