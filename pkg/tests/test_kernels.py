import math
import os
import subprocess
import sys

import numpy as np
import pytest

from rotor import _kernels
from rotor.maps import (Generator, LiftedWord, MapGroup, constant_term,
                        orbit_displacement_means, orbit_mean_with_tail,
                        orbit_segment, trig_term)
from rotor.mcg import MCGClass

ID = MCGClass.identity()


def build_group():
    gens = [
        Generator("skew", ID,
                  disp_x=[constant_term(math.sqrt(2) - 1)],
                  disp_y=[constant_term(0.3), trig_term(0.05, 1, 0)]),
        Generator("mix", ID,
                  disp_x=[trig_term(0.04, 1, 1)],
                  disp_y=[trig_term(0.03, 0, 1, phase=1.0)]),
        Generator("dehn", MCGClass(1, 0, 1, 1)),
    ]
    return MapGroup(gens)


G = build_group()
needs_numba = pytest.mark.skipif(not _kernels._HAVE_NUMBA,
                                 reason="numba backend unavailable")


@pytest.fixture
def restore_backend():
    before = _kernels.get_backend()
    yield
    _kernels.set_backend(before)


@needs_numba
def test_default_backend_is_numba():
    assert _kernels.get_backend() == "numba"


@needs_numba
def test_backends_agree_on_torus_orbit(restore_backend):
    # includes a Newton inverse letter; agreement is to fp noise, not bitwise,
    # because numba and numpy may round libm calls differently by 1 ulp
    w = G.word([(0, 1), (1, -1)])
    seeds = np.random.default_rng(0).uniform(0, 1, size=(12, 2))
    _kernels.set_backend("numba")
    a = orbit_displacement_means(w, seeds, 400)
    b_seg = orbit_segment(w, (0.2, 0.7), 50)
    _kernels.set_backend("numpy")
    c = orbit_displacement_means(w, seeds, 400)
    d_seg = orbit_segment(w, (0.2, 0.7), 50)
    assert np.abs(a - c).max() < 1e-10
    assert np.abs(b_seg - d_seg).max() < 1e-10


@needs_numba
def test_backends_agree_on_plane_orbit(restore_backend):
    w = G.word([(2, 1), (0, 1)])
    seeds = np.random.default_rng(1).uniform(0, 1, size=(8, 2))
    _kernels.set_backend("numba")
    a = orbit_displacement_means(w, seeds, 200)
    _kernels.set_backend("numpy")
    b = orbit_displacement_means(w, seeds, 200)
    assert np.abs(a - b).max() < 1e-9


@needs_numba
def test_backends_agree_on_tail_spread(restore_backend):
    w = G.word([(0, 1)])
    _kernels.set_backend("numba")
    m1, s1 = orbit_mean_with_tail(w, (0.11, 0.22), 2000)
    _kernels.set_backend("numpy")
    m2, s2 = orbit_mean_with_tail(w, (0.11, 0.22), 2000)
    assert np.abs(np.array(m1) - np.array(m2)).max() < 1e-12
    assert abs(s1 - s2) < 1e-12


def test_burn_consistency():
    w = G.word([(0, 1), (1, 1)])
    full = orbit_segment(w, (0.4, 0.9), 30)
    tail = orbit_segment(w, (0.4, 0.9), 20, burn=10)
    assert np.array_equal(full[10:], tail)


def test_set_backend_rejects_unknown():
    with pytest.raises(Exception):
        _kernels.set_backend("gpu")


def test_env_flag_disables_numba():
    code = (
        "import rotor._kernels as k\n"
        "assert k.get_backend() == 'numpy'\n"
        "assert not k._HAVE_NUMBA\n"
        "import math, numpy as np\n"
        "from rotor.maps import Generator, MapGroup, constant_term, "
        "orbit_displacement_means\n"
        "from rotor.mcg import MCGClass\n"
        "g = Generator('t', MCGClass.identity(), "
        "disp_x=[constant_term(0.25)])\n"
        "G = MapGroup([g])\n"
        "m = orbit_displacement_means(G.by_name('t'), "
        "np.array([[0.0, 0.0]]), 8)\n"
        "assert abs(m[0, 0] - 0.25) < 1e-15, m\n"
        "print('ok')\n"
    )
    env = dict(os.environ, ROTOR_NO_NUMBA="1")
    src = os.path.join(os.path.dirname(__file__), os.pardir, "src")
    env["PYTHONPATH"] = os.pathsep.join(
        p for p in [os.path.abspath(src), env.get("PYTHONPATH")] if p)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
