"""Closed arc-length-parametrized space curves with Frenet frames and tube-map scalars.

Sampled curves are represented by trigonometric interpolation (the curve is
periodic and smooth), so r', r'', r''' come out spectrally accurate; built-ins
carry analytic derivative callables instead.  The Frenet frame requires
curvature bounded away from zero: curves with inflection points are rejected,
not patched.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpeedError, ThinnessViolatedError, VanishingCurvatureError

K_MIN_DEFAULT = 1e-6
ROTATION_90 = np.array([[0.0, 1.0], [-1.0, 0.0]])  # R y = (y3, -y2)


# ---------------------------------------------------------------------------
# periodic spectral helpers
# ---------------------------------------------------------------------------

def fourier_wavenumbers(n, period):
    return 2.0 * np.pi / period * np.fft.fftfreq(n, d=1.0 / n)


def spectral_derivative(values, period, order=1):
    """Differentiate periodic samples along axis 0 via FFT."""
    values = np.asarray(values)
    n = values.shape[0]
    k = fourier_wavenumbers(n, period)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0  # Nyquist convention for odd derivatives
    shape = (n,) + (1,) * (values.ndim - 1)
    out = np.fft.ifft(np.fft.fft(values, axis=0) * mult.reshape(shape), axis=0)
    return out.real if np.isrealobj(values) else out


class _TrigInterpolant:
    """Evaluate a periodic sampled vector function and its derivatives anywhere."""

    def __init__(self, samples, period):
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        self.period = float(period)
        self.n = samples.shape[0]
        self.coeffs = np.fft.fft(samples, axis=0) / self.n
        self.k = fourier_wavenumbers(self.n, self.period)

    def __call__(self, s, order=0):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        mult = (1j * self.k) ** order if order else np.ones_like(self.k, dtype=complex)
        if order % 2 == 1 and self.n % 2 == 0:
            mult = mult.copy()
            mult[self.n // 2] = 0.0
        E = np.exp(1j * np.outer(s, self.k))
        return (E @ (self.coeffs * mult[:, None])).real


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

class ClosedCurve:
    """Closed C^3 curve parametrized by arc length on [0, length)."""

    def __init__(self, length, evaluator, samples_per_period=2048, k_min=K_MIN_DEFAULT, descriptor=None):
        self.length = float(length)
        self._eval = evaluator  # callable (s, order) -> (len(s), 3)
        self.samples_per_period = int(samples_per_period)
        self.k_min = float(k_min)
        self.descriptor = descriptor or {}
        self._validate()

    @classmethod
    def from_samples(cls, length, points, k_min=K_MIN_DEFAULT, descriptor=None):
        points = np.asarray(points, dtype=float)
        interp = _TrigInterpolant(points, length)

        def evaluator(s, order):
            return interp(s, order)

        return cls(length, evaluator, samples_per_period=points.shape[0], k_min=k_min, descriptor=descriptor)

    def point(self, s):
        return self._eval(np.atleast_1d(np.asarray(s, dtype=float)), 0)

    def derivative(self, s, order):
        return self._eval(np.atleast_1d(np.asarray(s, dtype=float)), order)

    def grid(self, n):
        return np.arange(n) * (self.length / n)

    def _validate(self):
        s = self.grid(min(self.samples_per_period, 512))
        r1 = self.derivative(s, 1)
        speed = np.linalg.norm(r1, axis=-1)
        if np.abs(speed - 1.0).max() > 1e-8:
            raise ValueError(f"not arc-length parametrized: max | |r'| - 1 | = {np.abs(speed - 1.0).max():.2e}")
        for order in range(4):
            a = self._eval(np.array([0.0]), order)
            b = self._eval(np.array([self.length]), order)
            if np.abs(a - b).max() > 1e-8:
                raise ValueError(f"curve not closed at derivative order {order}")
        k = np.linalg.norm(self.derivative(s, 2), axis=-1)
        if k.min() < self.k_min:
            raise VanishingCurvatureError(f"curvature {k.min():.2e} below threshold {self.k_min:.0e}")

    def max_curvature(self, n=512):
        s = self.grid(n)
        return float(np.linalg.norm(self.derivative(s, 2), axis=-1).max())


@dataclass(frozen=True)
class RotationProfile:
    """Cross-section rotation angle along the curve with analytic derivative."""

    alpha: callable
    alpha_prime: callable
    descriptor: dict = field(default_factory=dict)

    @classmethod
    def zero(cls):
        return cls(alpha=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                   alpha_prime=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                   descriptor={"name": "zero"})

    @classmethod
    def constant(cls, angle):
        return cls(alpha=lambda s: np.full_like(np.asarray(s, dtype=float), angle),
                   alpha_prime=lambda s: np.zeros_like(np.asarray(s, dtype=float)),
                   descriptor={"name": "constant", "angle": angle})

    @classmethod
    def winding(cls, turns, length):
        rate = 2.0 * np.pi * turns / length
        return cls(alpha=lambda s: rate * np.asarray(s, dtype=float),
                   alpha_prime=lambda s: np.full_like(np.asarray(s, dtype=float), rate),
                   descriptor={"name": "winding", "turns": turns})

    @classmethod
    def fourier(cls, length, a0=0.0, cos_coeffs=(), sin_coeffs=()):
        cos_coeffs = tuple(float(c) for c in cos_coeffs)
        sin_coeffs = tuple(float(c) for c in sin_coeffs)
        w = 2.0 * np.pi / length

        def alpha(s):
            s = np.asarray(s, dtype=float)
            out = np.full_like(s, a0)
            for m, c in enumerate(cos_coeffs, start=1):
                out = out + c * np.cos(m * w * s)
            for m, c in enumerate(sin_coeffs, start=1):
                out = out + c * np.sin(m * w * s)
            return out

        def alpha_prime(s):
            s = np.asarray(s, dtype=float)
            out = np.zeros_like(s)
            for m, c in enumerate(cos_coeffs, start=1):
                out = out - c * m * w * np.sin(m * w * s)
            for m, c in enumerate(sin_coeffs, start=1):
                out = out + c * m * w * np.cos(m * w * s)
            return out

        return cls(alpha=alpha, alpha_prime=alpha_prime,
                   descriptor={"name": "fourier", "a0": a0, "cos": cos_coeffs, "sin": sin_coeffs})


@dataclass(frozen=True)
class FrenetData:
    """Frame, curvature/torsion and rotated frame sampled along the curve."""

    s: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    k: np.ndarray
    k_prime: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    alpha_prime: np.ndarray
    N_alpha: np.ndarray
    B_alpha: np.ndarray


def frenet(curve, s, rotation=None):
    """Frenet data at arc-length positions s (scalar or array).

    T = r', k = |r''|, N = r''/k, B = T x N, tau = det(r', r'', r''')/k^2;
    raises if the curvature falls below the curve's threshold.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    rotation = rotation or RotationProfile.zero()
    r1 = curve.derivative(s, 1)
    r2 = curve.derivative(s, 2)
    r3 = curve.derivative(s, 3)
    k = np.linalg.norm(r2, axis=-1)
    if k.min() < curve.k_min:
        raise VanishingCurvatureError(f"curvature {k.min():.2e} below threshold {curve.k_min:.0e}")
    T = r1
    N = r2 / k[..., None]
    B = np.cross(T, N)
    tau = np.einsum("ij,ij->i", np.cross(r1, r2), r3) / k**2
    k_prime = np.einsum("ij,ij->i", r2, r3) / k

    a = np.atleast_1d(np.asarray(rotation.alpha(s), dtype=float))
    ap = np.atleast_1d(np.asarray(rotation.alpha_prime(s), dtype=float))
    ca, sa = np.cos(a)[..., None], np.sin(a)[..., None]
    return FrenetData(s=s, T=T, N=N, B=B, k=k, k_prime=k_prime, tau=tau,
                      alpha=a, alpha_prime=ap,
                      N_alpha=ca * N + sa * B, B_alpha=-sa * N + ca * B)


# ---------------------------------------------------------------------------
# arc-length reparametrization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RawCurve:
    """Closed curve given on the parameter circle t in [0, 2 pi)."""

    position: callable  # (n,) -> (n, 3)
    velocity: callable = None
    descriptor: dict = field(default_factory=dict)


def reparametrize_arclength(raw, n_samples=2048, newton_tol=1e-12, descriptor=None):
    """Resample a raw closed curve by arc length.

    The cumulative arc length is represented spectrally (exact antiderivative of
    the trigonometric interpolant of the speed) and inverted per target node by
    Newton iteration.
    """
    n_fine = max(4 * n_samples, 4096)
    t = np.arange(n_fine) * (2.0 * np.pi / n_fine)
    pts = raw.position(t)
    if raw.velocity is not None:
        velocity = lambda tt: raw.velocity(np.atleast_1d(np.asarray(tt, dtype=float)))
    else:
        pos_interp = _TrigInterpolant(pts, 2.0 * np.pi)
        velocity = lambda tt: pos_interp(np.atleast_1d(tt), 1)
    vel_samples = velocity(t)

    speed_samples = np.linalg.norm(vel_samples, axis=-1)
    if speed_samples.min() < 1e-8:
        raise DegenerateSpeedError(f"minimum parametrization speed {speed_samples.min():.2e} below 1e-8")

    mean_speed = speed_samples.mean()
    length = mean_speed * 2.0 * np.pi

    # spectral antiderivative of the oscillatory part of the speed
    c = np.fft.fft(speed_samples) / n_fine
    k = fourier_wavenumbers(n_fine, 2.0 * np.pi)
    anti = np.zeros_like(c)
    nz = k != 0
    anti[nz] = c[nz] / (1j * k[nz])
    anti0 = anti.sum().real  # value of the oscillatory antiderivative at t = 0

    def sigma(tt):
        tt = np.atleast_1d(np.asarray(tt, dtype=float))
        E = np.exp(1j * np.outer(tt, k))
        osc = (E @ anti).real - anti0
        return mean_speed * tt + osc

    def speed(tt):
        return np.linalg.norm(velocity(np.atleast_1d(tt)), axis=-1)

    targets = np.arange(n_samples) * (length / n_samples)
    tt = targets / mean_speed
    for _ in range(60):
        delta = (sigma(tt) - targets) / speed(tt)
        tt = tt - delta
        if np.abs(delta).max() < newton_tol:
            break
    else:
        raise RuntimeError("arc-length inversion did not converge")

    pts_al = raw.position(tt)
    return ClosedCurve.from_samples(length, pts_al, descriptor=descriptor or dict(raw.descriptor))


# ---------------------------------------------------------------------------
# built-in registry
# ---------------------------------------------------------------------------

def make_circle(radius=1.0):
    R = float(radius)
    zeros = lambda s: np.zeros_like(s)
    r = lambda s: np.stack([R * np.cos(s / R), R * np.sin(s / R), zeros(s)], axis=-1)
    r1 = lambda s: np.stack([-np.sin(s / R), np.cos(s / R), zeros(s)], axis=-1)
    r2 = lambda s: np.stack([-np.cos(s / R) / R, -np.sin(s / R) / R, zeros(s)], axis=-1)
    r3 = lambda s: np.stack([np.sin(s / R) / R**2, -np.cos(s / R) / R**2, zeros(s)], axis=-1)
    curve = ClosedCurve(2.0 * np.pi * R, lambda s, o: {0: r, 1: r1, 2: r2, 3: r3}[o](s),
                        descriptor={"name": "circle", "radius": R})
    return curve


def make_ellipse(a=2.0, b=1.0, n_samples=2048):
    a, b = float(a), float(b)
    raw = RawCurve(
        position=lambda t: np.stack([a * np.cos(t), b * np.sin(t), np.zeros_like(t)], axis=-1),
        velocity=lambda t: np.stack([-a * np.sin(t), b * np.cos(t), np.zeros_like(t)], axis=-1),
        descriptor={"name": "ellipse", "a": a, "b": b},
    )
    return reparametrize_arclength(raw, n_samples=n_samples)


def make_torus_knot(p=2, q=3, R=3.0, rho_t=0.6, n_samples=2048):
    p, q, R, rho = int(p), int(q), float(R), float(rho_t)

    def position(t):
        w = R + rho * np.cos(q * t)
        return np.stack([w * np.cos(p * t), w * np.sin(p * t), rho * np.sin(q * t)], axis=-1)

    def velocity(t):
        w = R + rho * np.cos(q * t)
        dw = -q * rho * np.sin(q * t)
        return np.stack(
            [dw * np.cos(p * t) - p * w * np.sin(p * t),
             dw * np.sin(p * t) + p * w * np.cos(p * t),
             q * rho * np.cos(q * t)],
            axis=-1,
        )

    raw = RawCurve(position=position, velocity=velocity,
                   descriptor={"name": "torus_knot", "p": p, "q": q, "R": R, "rho_t": rho})
    return reparametrize_arclength(raw, n_samples=n_samples)


def curve_from_json(path, n_samples=2048):
    """Load a raw curve from Fourier coefficients per coordinate and reparametrize.

    Schema: {"x": {"a0": float, "cos": [...], "sin": [...]}, "y": {...}, "z": {...}}
    with the raw parameter running over [0, 2 pi).
    """
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)

    def series(coord):
        spec = data.get(coord, {})
        a0 = float(spec.get("a0", 0.0))
        cos_c = [float(v) for v in spec.get("cos", [])]
        sin_c = [float(v) for v in spec.get("sin", [])]
        return a0, cos_c, sin_c

    comps = [series(c) for c in ("x", "y", "z")]

    def position(t):
        t = np.asarray(t, dtype=float)
        cols = []
        for a0, cos_c, sin_c in comps:
            v = np.full_like(t, a0)
            for m, cc in enumerate(cos_c, start=1):
                v = v + cc * np.cos(m * t)
            for m, sc in enumerate(sin_c, start=1):
                v = v + sc * np.sin(m * t)
            cols.append(v)
        return np.stack(cols, axis=-1)

    def velocity(t):
        t = np.asarray(t, dtype=float)
        cols = []
        for a0, cos_c, sin_c in comps:
            v = np.zeros_like(t)
            for m, cc in enumerate(cos_c, start=1):
                v = v - cc * m * np.sin(m * t)
            for m, sc in enumerate(sin_c, start=1):
                v = v + sc * m * np.cos(m * t)
            cols.append(v)
        return np.stack(cols, axis=-1)

    raw = RawCurve(position=position, velocity=velocity, descriptor={"name": "json", "path": str(path)})
    return reparametrize_arclength(raw, n_samples=n_samples)


def build_curve(descriptor):
    d = dict(descriptor)
    name = d.pop("name")
    if name == "circle":
        return make_circle(**d)
    if name == "ellipse":
        return make_ellipse(**d)
    if name == "torus_knot":
        return make_torus_knot(**d)
    if name == "json":
        return curve_from_json(**d)
    raise KeyError(f"unknown curve {name!r}")


def build_rotation(descriptor, length=None):
    d = dict(descriptor)
    name = d.pop("name")
    if name == "zero":
        return RotationProfile.zero()
    if name == "constant":
        return RotationProfile.constant(**d)
    if name == "winding":
        return RotationProfile.winding(length=length, **d)
    if name == "fourier":
        return RotationProfile.fourier(length=length, **d)
    raise KeyError(f"unknown rotation profile {name!r}")


# ---------------------------------------------------------------------------
# tube-map scalars
# ---------------------------------------------------------------------------

def beta(curve, rotation, eps, s, y):
    """Jacobian scalar of the tube map: 1 - eps k(s) <z_alpha, y>."""
    fr = frenet(curve, s, rotation)
    y = np.asarray(y, dtype=float)
    za = np.stack([np.cos(fr.alpha), np.sin(fr.alpha)], axis=-1)
    return 1.0 - eps * fr.k * (za[..., 0] * y[..., 0] + za[..., 1] * y[..., 1])


def validate_thinness(curve, rotation, eps, rho, margin=0.05):
    """True iff eps * max k * rho stays below 1 - margin (tube map injective)."""
    return bool(eps * curve.max_curvature() * rho < 1.0 - margin)


@dataclass(frozen=True)
class TubeMapSample:
    """Per-slice tube-map data on a cross-section grid: z_alpha and beta values."""

    eps: float
    z_alpha: np.ndarray  # (n_s, 2)
    beta: np.ndarray     # (n_s, nx, ny)


def evaluate_tube_map(frame, eps, grid):
    """Tube-map sample for precomputed Frenet data over a cross-section grid.

    Raises unless beta stays positive on the active (masked) nodes.
    """
    Y2, Y3 = np.meshgrid(grid.y2, grid.y3, indexing="ij")
    ca, sa = np.cos(frame.alpha), np.sin(frame.alpha)
    za = np.stack([ca, sa], axis=-1)
    dot = ca[:, None, None] * Y2[None] + sa[:, None, None] * Y3[None]
    b = 1.0 - eps * frame.k[:, None, None] * dot
    if (b[:, grid.mask] <= 0.0).any():
        raise ThinnessViolatedError("tube map degenerate: beta <= 0 on the cross-section")
    return TubeMapSample(eps=float(eps), z_alpha=za, beta=b)
