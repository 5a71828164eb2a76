"""Torus maps as exact data: integer linear part plus trig-polynomial displacement.

A Generator is the plane map p -> A p + D(p) with A in GL(2,Z) and D a pair of
finite trigonometric polynomials with integer frequency vectors, so D is
Z^2-periodic and the map descends to the torus composed with the linear class.
Group elements are free words over generators; a lift adds an integer deck
translation in front.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import NewtonDivergence, NotIsotopicToIdentity, RotorError
from .mcg import MCGClass

__all__ = [
    "Generator",
    "MapGroup",
    "Word",
    "LiftedWord",
    "reduce_point",
    "reduce_batch",
    "apply_lift",
    "apply_torus",
    "apply_torus_batch",
    "compose",
    "inverse",
    "commutator",
    "linear_part",
    "displacement_field",
    "compose_lift",
    "inverse_lift",
    "commutator_lift",
    "translate_lift",
    "trig_term",
    "constant_term",
]

_SNAP = 1e-15
_NEWTON_TOL = 1e-12
_NEWTON_MAX = 60


def reduce_point(p) -> Tuple[float, float]:
    """Canonical torus representative in [0,1)^2, with a snap at the seam."""
    x = p[0] - math.floor(p[0])
    y = p[1] - math.floor(p[1])
    if 1.0 - x < _SNAP:
        x = 0.0
    if 1.0 - y < _SNAP:
        y = 0.0
    return (x, y)


def reduce_batch(pts: np.ndarray) -> np.ndarray:
    out = pts - np.floor(pts)
    out[1.0 - out < _SNAP] = 0.0
    return out


def trig_term(amplitude: float, kx: int, ky: int, phase: float = 0.0):
    """One displacement term amplitude*sin(2pi*(kx*x + ky*y) + phase)."""
    if kx != int(kx) or ky != int(ky):
        raise RotorError("frequencies must be integers")
    return (float(amplitude), int(kx), int(ky), float(phase))


def constant_term(value: float):
    # sin(pi/2) = 1 turns a term into a constant offset
    return (float(value), 0, 0, math.pi / 2)


def _eval_terms(terms, x, y):
    out = np.zeros_like(x)
    for amp, kx, ky, ph in terms:
        out += amp * np.sin(2.0 * math.pi * (kx * x + ky * y) + ph)
    return out


def _eval_terms_deriv(terms, x, y):
    dx = np.zeros_like(x)
    dy = np.zeros_like(x)
    for amp, kx, ky, ph in terms:
        c = amp * 2.0 * math.pi * np.cos(2.0 * math.pi * (kx * x + ky * y) + ph)
        dx += c * kx
        dy += c * ky
    return dx, dy


class Generator:
    """One torus homeomorphism, given exactly.

    disp_x / disp_y are tuples of trig terms (see trig_term).  An explicit
    inverse generator may be supplied and is verified by round trips; with a
    constant-only displacement the inverse is derived in closed form.
    Otherwise inverse evaluation runs Newton iteration, certified by the
    contraction bound  ||A^-1||_inf * max-row-sum of the displacement
    Jacobian < 1  (the bare row bound of the sufficient condition, tightened
    by the linear factor, which is 1 for A = +-Id).
    """

    def __init__(self, name: str, linear: MCGClass, disp_x=(), disp_y=(),
                 inverse: Optional["Generator"] = None, _derive: bool = True):
        self.name = str(name)
        self.linear = linear
        self.disp_x = tuple(trig_term(*t) for t in disp_x)
        self.disp_y = tuple(trig_term(*t) for t in disp_y)
        self.is_trig = True

        row_x = sum(abs(a) * 2.0 * math.pi * (abs(kx) + abs(ky))
                    for a, kx, ky, _ in self.disp_x)
        row_y = sum(abs(a) * 2.0 * math.pi * (abs(kx) + abs(ky))
                    for a, kx, ky, _ in self.disp_y)
        self.displacement_lipschitz = max(row_x, row_y)
        inv = linear.inverse()
        self.linear_inf_inv = float(max(abs(inv.a) + abs(inv.b),
                                        abs(inv.c) + abs(inv.d)))
        self.contraction_margin = 1.0 - self.linear_inf_inv * self.displacement_lipschitz

        self.inverse_gen = None
        if inverse is not None:
            self._check_round_trip(inverse)
            self.inverse_gen = inverse
        elif _derive and all(t[1] == 0 and t[2] == 0
                             for t in self.disp_x + self.disp_y):
            self.inverse_gen = self._constant_inverse()
        self.certified = self.inverse_gen is not None or self.contraction_margin > 0.0

    def _constant_inverse(self):
        cx = _eval_terms(self.disp_x, np.zeros(1), np.zeros(1))[0]
        cy = _eval_terms(self.disp_y, np.zeros(1), np.zeros(1))[0]
        inv = self.linear.inverse()
        mx = -(inv.a * cx + inv.b * cy)
        my = -(inv.c * cx + inv.d * cy)
        return Generator(self.name + "^-1", inv,
                         disp_x=(constant_term(mx),), disp_y=(constant_term(my),),
                         _derive=False)

    def _check_round_trip(self, other: "Generator"):
        g = np.linspace(0.05, 0.95, 7)
        pts = np.array([(x, y) for x in g for y in g])
        fwd = other.apply_plane_batch(self.apply_plane_batch(pts))
        back = self.apply_plane_batch(other.apply_plane_batch(pts))
        err = max(np.abs(fwd - pts).max(), np.abs(back - pts).max())
        if err > 1e-10:
            raise RotorError(
                "supplied inverse for %r fails round trip (err %.3g)" % (self.name, err))

    def apply_plane_batch(self, pts: np.ndarray) -> np.ndarray:
        """Images of plane points, shape (n,2).  Trig terms are evaluated at
        the reduced representatives, which is exact by periodicity and keeps
        the arguments small on long plane orbits."""
        pts = np.asarray(pts, dtype=float)
        a = self.linear
        out = np.empty_like(pts)
        out[:, 0] = a.a * pts[:, 0] + a.b * pts[:, 1]
        out[:, 1] = a.c * pts[:, 0] + a.d * pts[:, 1]
        red = reduce_batch(pts)
        out[:, 0] += _eval_terms(self.disp_x, red[:, 0], red[:, 1])
        out[:, 1] += _eval_terms(self.disp_y, red[:, 0], red[:, 1])
        return out

    def invert_plane_batch(self, pts: np.ndarray) -> np.ndarray:
        if self.inverse_gen is not None:
            return self.inverse_gen.apply_plane_batch(pts)
        return self._newton_batch(np.asarray(pts, dtype=float))

    def _newton_batch(self, q: np.ndarray) -> np.ndarray:
        a = self.linear
        inv = a.inverse()
        p = np.empty_like(q)
        p[:, 0] = inv.a * q[:, 0] + inv.b * q[:, 1]
        p[:, 1] = inv.c * q[:, 0] + inv.d * q[:, 1]
        for _ in range(_NEWTON_MAX):
            red = reduce_batch(p)
            fx = a.a * p[:, 0] + a.b * p[:, 1] \
                + _eval_terms(self.disp_x, red[:, 0], red[:, 1]) - q[:, 0]
            fy = a.c * p[:, 0] + a.d * p[:, 1] \
                + _eval_terms(self.disp_y, red[:, 0], red[:, 1]) - q[:, 1]
            bad = np.maximum(np.abs(fx), np.abs(fy)) > _NEWTON_TOL
            if not bad.any():
                return p
            jxx, jxy = _eval_terms_deriv(self.disp_x, red[:, 0], red[:, 1])
            jyx, jyy = _eval_terms_deriv(self.disp_y, red[:, 0], red[:, 1])
            jxx += a.a
            jxy += a.b
            jyx += a.c
            jyy += a.d
            det = jxx * jyy - jxy * jyx
            det[det == 0.0] = np.nan
            p[:, 0] -= (jyy * fx - jxy * fy) / det
            p[:, 1] -= (-jyx * fx + jxx * fy) / det
        raise NewtonDivergence(
            "inverse of %r did not reach residual %g in %d steps"
            % (self.name, _NEWTON_TOL, _NEWTON_MAX))

    def __repr__(self):
        return "Generator(%r, linear=%r, %d+%d terms)" % (
            self.name, self.linear, len(self.disp_x), len(self.disp_y))


class MapGroup:
    """Finitely generated group of torus maps; group elements are Words."""

    def __init__(self, generators: Sequence[Generator]):
        self.generators = tuple(generators)
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise RotorError("generator names must be distinct")

    def word(self, letters) -> "Word":
        """Build a word from (index, sign) pairs or from a string.

        The string form is whitespace-separated generator names, with a
        trailing apostrophe for an inverse: "dehn tr' dehn".  Letters
        still compose left to right as maps, last letter first.
        """
        if isinstance(letters, str):
            pairs = []
            for tok in letters.split():
                sign = 1
                if tok.endswith("'"):
                    sign, tok = -1, tok[:-1]
                for i, g in enumerate(self.generators):
                    if g.name == tok:
                        pairs.append((i, sign))
                        break
                else:
                    raise RotorError("unknown generator %r in word" % tok)
            letters = pairs
        return Word(self, letters)

    def gen(self, index: int, sign: int = 1) -> "Word":
        return Word(self, [(index, sign)])

    def by_name(self, name: str) -> "Word":
        for i, g in enumerate(self.generators):
            if g.name == name:
                return self.gen(i)
        raise KeyError(name)

    def identity(self) -> "Word":
        return Word(self, [])


def _free_reduce(letters):
    out = []
    for idx, sign in letters:
        if out and out[-1][0] == idx and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((idx, sign))
    return tuple(out)


class Word:
    """A group element as a reduced signed generator sequence.

    Letters compose left to right as maps: the last letter acts first.
    """

    def __init__(self, group: MapGroup, letters):
        self.group = group
        for idx, sign in letters:
            if not (0 <= idx < len(group.generators)):
                raise RotorError("generator index %d out of range" % idx)
            if sign not in (1, -1):
                raise RotorError("letter sign must be +1 or -1")
        self.letters = _free_reduce(letters)

    def is_identity_word(self) -> bool:
        return not self.letters

    def lift(self, extra_translation=(0, 0)) -> "LiftedWord":
        return LiftedWord(self, extra_translation)

    def __mul__(self, other: "Word") -> "Word":
        return compose(self, other)

    def __repr__(self):
        parts = []
        for idx, sign in self.letters:
            name = self.group.generators[idx].name
            parts.append(name if sign > 0 else name + "^-1")
        return "Word(%s)" % (" ".join(parts) or "id")


class LiftedWord:
    """T_v composed with the canonical lift of a word; v integral."""

    def __init__(self, word: Word, extra_translation=(0, 0)):
        v = (int(extra_translation[0]), int(extra_translation[1]))
        if v != (extra_translation[0], extra_translation[1]):
            raise RotorError("deck translation must be integral")
        self.word = word
        self.extra_translation = v

    def __repr__(self):
        return "LiftedWord(%r, v=%r)" % (self.word, self.extra_translation)


def compose(w1: Word, w2: Word) -> Word:
    if w1.group is not w2.group:
        raise RotorError("words over different groups")
    return Word(w1.group, list(w1.letters) + list(w2.letters))


def inverse(w: Word) -> Word:
    return Word(w.group, [(i, -s) for i, s in reversed(w.letters)])


def commutator(w1: Word, w2: Word) -> Word:
    return compose(compose(w1, w2), compose(inverse(w1), inverse(w2)))


def linear_part(w: Word) -> MCGClass:
    out = MCGClass.identity()
    for idx, sign in w.letters:
        a = w.group.generators[idx].linear
        out = out * (a if sign > 0 else a.inverse())
    return out


def compose_lift(l1: LiftedWord, l2: LiftedWord) -> LiftedWord:
    # (T_u W1)(T_v W2) = T_{u + [W1] v} (W1 W2)
    u, v = l1.extra_translation, l2.extra_translation
    a = linear_part(l1.word)
    shift = a.apply(v)
    return LiftedWord(compose(l1.word, l2.word), (u[0] + shift[0], u[1] + shift[1]))


def inverse_lift(lw: LiftedWord) -> LiftedWord:
    # (T_v W)^-1 = T_{-[W]^-1 v} W^-1
    a = linear_part(lw.word).inverse()
    shift = a.apply(lw.extra_translation)
    return LiftedWord(inverse(lw.word), (-shift[0], -shift[1]))


def commutator_lift(l1: LiftedWord, l2: LiftedWord) -> LiftedWord:
    return compose_lift(compose_lift(l1, l2),
                        compose_lift(inverse_lift(l1), inverse_lift(l2)))


def translate_lift(lw: LiftedWord, v) -> LiftedWord:
    """The lift T_v composed with lw; v integral."""
    u = lw.extra_translation
    return LiftedWord(lw.word, (u[0] + v[0], u[1] + v[1]))


def _as_lift(w) -> LiftedWord:
    return w if isinstance(w, LiftedWord) else LiftedWord(w)


def apply_lift_batch(lw, pts: np.ndarray) -> np.ndarray:
    """Evaluate the lift on plane points, shape (n,2)."""
    lw = _as_lift(lw)
    out = np.array(pts, dtype=float)
    gens = lw.word.group.generators
    for idx, sign in reversed(lw.word.letters):
        g = gens[idx]
        out = g.apply_plane_batch(out) if sign > 0 else g.invert_plane_batch(out)
    out[:, 0] += lw.extra_translation[0]
    out[:, 1] += lw.extra_translation[1]
    return out


def apply_lift(lw, p) -> Tuple[float, float]:
    q = apply_lift_batch(lw, np.array([p], dtype=float))[0]
    return (float(q[0]), float(q[1]))


def apply_torus_batch(w, pts: np.ndarray) -> np.ndarray:
    lw = _as_lift(w)
    return reduce_batch(apply_lift_batch(lw, reduce_batch(np.asarray(pts, dtype=float))))


def apply_torus(w, p) -> Tuple[float, float]:
    q = apply_torus_batch(w, np.array([p], dtype=float))[0]
    return (float(q[0]), float(q[1]))


def displacement_field(lw, p) -> Tuple[float, float]:
    """The vector apply_lift(p~) - p~, independent of the chosen lift of p."""
    lw = _as_lift(lw)
    if not linear_part(lw.word).is_identity():
        raise NotIsotopicToIdentity(
            "word %r has a nontrivial linear part" % (lw.word,))
    px, py = reduce_point(p)
    qx, qy = apply_lift(lw, (px, py))
    return (qx - px, qy - py)


def displacement_field_batch(lw, pts: np.ndarray) -> np.ndarray:
    lw = _as_lift(lw)
    if not linear_part(lw.word).is_identity():
        raise NotIsotopicToIdentity(
            "word %r has a nontrivial linear part" % (lw.word,))
    red = reduce_batch(np.asarray(pts, dtype=float))
    return apply_lift_batch(lw, red) - red


# ---------------------------------------------------------------------------
# compiled word programs for the long-orbit kernels


class _Program:
    __slots__ = ("slot", "mode", "lin", "lin_inv", "tstart", "tend",
                 "amps", "fkx", "fky", "phase", "row", "vx", "vy", "kernel_ok")


def compile_program(lw) -> _Program:
    """Flatten a lifted word into the array form the orbit kernels consume.

    Inverse letters of generators carrying an explicit inverse are rewritten
    as forward letters of that inverse; remaining inverse letters run Newton
    inside the kernel.  Words touching non-trig generators fall back to the
    object path and never reach the kernels.
    """
    lw = _as_lift(lw)
    gens = lw.word.group.generators
    prog = _Program()
    prog.kernel_ok = all(g.is_trig for g in gens)

    table = []       # Generator objects whose forward data fill the arrays
    table_index = {}
    letters = []

    def slot_of(gen):
        key = id(gen)
        if key not in table_index:
            table_index[key] = len(table)
            table.append(gen)
        return table_index[key]

    for idx, sign in lw.word.letters:
        g = gens[idx]
        if sign > 0:
            letters.append((slot_of(g), 0))
        elif g.inverse_gen is not None and g.inverse_gen.is_trig:
            letters.append((slot_of(g.inverse_gen), 0))
        else:
            letters.append((slot_of(g), 1))

    nslots = max(1, len(table))
    prog.slot = np.array([l[0] for l in letters], dtype=np.int64)
    prog.mode = np.array([l[1] for l in letters], dtype=np.int64)
    prog.lin = np.zeros((nslots, 2, 2))
    prog.lin_inv = np.zeros((nslots, 2, 2))
    prog.tstart = np.zeros(nslots, dtype=np.int64)
    prog.tend = np.zeros(nslots, dtype=np.int64)
    amps, fkx, fky, phase, row = [], [], [], [], []
    for i, g in enumerate(table):
        if not g.is_trig:
            continue
        a, ai = g.linear, g.linear.inverse()
        prog.lin[i] = [[a.a, a.b], [a.c, a.d]]
        prog.lin_inv[i] = [[ai.a, ai.b], [ai.c, ai.d]]
        prog.tstart[i] = len(amps)
        for r, terms in ((0, g.disp_x), (1, g.disp_y)):
            for amp, kx, ky, ph in terms:
                amps.append(amp)
                fkx.append(float(kx))
                fky.append(float(ky))
                phase.append(ph)
                row.append(r)
        prog.tend[i] = len(amps)
    prog.amps = np.array(amps, dtype=float)
    prog.fkx = np.array(fkx, dtype=float)
    prog.fky = np.array(fky, dtype=float)
    prog.phase = np.array(phase, dtype=float)
    prog.row = np.array(row, dtype=np.int64)
    prog.vx = float(lw.extra_translation[0])
    prog.vy = float(lw.extra_translation[1])
    return prog


def _prog_args(prog: _Program):
    return (prog.slot, prog.mode, prog.lin, prog.lin_inv, prog.tstart,
            prog.tend, prog.amps, prog.fkx, prog.fky, prog.phase, prog.row,
            prog.vx, prog.vy)


def orbit_displacement_means(w, seeds: np.ndarray, n: int, threads: int = 1
                             ) -> np.ndarray:
    """n-step displacement means (lift^n(p) - p)/n for each seed, shape (m,2).

    Words with identity linear part iterate on the torus and accumulate the
    per-step displacement with compensated summation; other words iterate in
    plane coordinates (hyperbolic words overflow to inf, which is reported
    as is).
    """
    lw = _as_lift(w)
    seeds = np.ascontiguousarray(np.asarray(seeds, dtype=float).reshape(-1, 2))
    if n < 1:
        raise RotorError("orbit length must be >= 1")
    plane_mode = not linear_part(lw.word).is_identity()
    prog = compile_program(lw)
    if not prog.kernel_ok:
        return _object_orbit_means(lw, seeds, n, plane_mode)
    args = _prog_args(prog)

    def run(chunk):
        return _kernels.orbit_mean_batch(chunk, n, plane_mode, *args)

    if threads <= 1 or len(seeds) < 2:
        return run(seeds)
    return _parallel_over_seeds(run, seeds, threads)


def _parallel_over_seeds(run, seeds, threads):
    from concurrent.futures import ThreadPoolExecutor

    chunks = np.array_split(seeds, min(threads * 4, len(seeds)))
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(run, chunks))
    return np.concatenate(parts, axis=0)


def _object_orbit_means(lw, seeds, n, plane_mode):
    with np.errstate(over="ignore", invalid="ignore"):
        if plane_mode:
            p = seeds.copy()
            for _ in range(n):
                p = apply_lift_batch(lw, p)
            return (p - seeds) / n
        acc = np.zeros_like(seeds)
        comp = np.zeros_like(seeds)
        p = reduce_batch(seeds.copy())
        for _ in range(n):
            q = apply_lift_batch(lw, p)
            d = q - p
            # Kahan step keeps 1e6-term sums honest
            t = d - comp
            s = acc + t
            comp = (s - acc) - t
            acc = s
            p = reduce_batch(q)
        return (acc - comp) / n


def orbit_mean_with_tail(w, seed, n: int):
    """Displacement mean plus the max deviation of the last n//10 partial means."""
    lw = _as_lift(w)
    plane_mode = not linear_part(lw.word).is_identity()
    prog = compile_program(lw)
    if prog.kernel_ok:
        mx, my, spread = _kernels.orbit_mean_tail(
            float(seed[0]), float(seed[1]), n, plane_mode, *_prog_args(prog))
        if math.isnan(mx):
            raise NewtonDivergence("inverse letter failed to reach residual")
        return (mx, my), spread
    window = max(1, n // 10)
    seeds = np.array([seed], dtype=float)
    means = np.empty((0, 2))
    # object path: track partial means explicitly
    p = seeds.copy()
    acc = np.zeros(2)
    comp = np.zeros(2)
    tail = []
    red = reduce_batch(p) if not plane_mode else p
    cur = red.copy()
    for k in range(1, n + 1):
        q = apply_lift_batch(lw, cur)
        if plane_mode:
            mean_k = (q[0] - seeds[0]) / k
            cur = q
        else:
            t = (q[0] - cur[0]) - comp
            s = acc + t
            comp = (s - acc) - t
            acc = s
            mean_k = (acc - comp) / k
            cur = reduce_batch(q)
        if k > n - window:
            tail.append(mean_k.copy())
    final = mean_k
    spread = max(float(np.hypot(*(t - final))) for t in tail)
    return (float(final[0]), float(final[1])), spread


def orbit_segment(w, seed, n: int, burn: int = 0) -> np.ndarray:
    """Torus orbit points w^burn(p), ..., w^{burn+n-1}(p), shape (n,2)."""
    lw = _as_lift(w)
    prog = compile_program(lw)
    if prog.kernel_ok:
        out = _kernels.orbit_collect(float(seed[0]), float(seed[1]), burn, n,
                                     *_prog_args(prog))
        if np.isnan(out).any():
            raise NewtonDivergence("inverse letter failed to reach residual")
        return out
    out = np.empty((n, 2))
    p = np.array([reduce_point(seed)])
    for _ in range(burn):
        p = apply_torus_batch(lw, p)
    for k in range(n):
        out[k] = p[0]
        p = apply_torus_batch(lw, p)
    return out
