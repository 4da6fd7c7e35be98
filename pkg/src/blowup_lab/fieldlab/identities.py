r"""Quadrature audit of the weighted integral identities behind the blow-up argument.

All sphere integrals are reduced to derivative tensors of the weight:
:math:`\int e^{\omega\cdot x} d\omega = F`, :math:`\int \omega_i e^{\omega\cdot x} d\omega
= \partial_i F` and so on, so a double integral
:math:`\iint g(x)\,\omega_i\omega_j e^{\omega\cdot x}\,d\omega\,dx` becomes
:math:`\int g\,\partial_{ij}F\,dx`. Integrands are built from the analytic
jets of manufactured fields; the only discretisation is the midpoint rule.

Notation used in the names below: ``div`` is the divergence, ``curl`` the
curl, ``psi = u . omega`` and every ``*2`` is a weighted square integral.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import weightfn
from .grid import Grid
from .manufactured import LEVI_CIVITA


class CoefficientError(ValueError):
    """Elastic structural constants violate the required sign/size conditions."""


@dataclass(frozen=True)
class ElasticCoeffs:
    """Structural constants of the quadratic isotropic elastic nonlinearity."""

    sigma111: float
    sigma11: float
    sigma12: float
    sigma2: float
    sigma3: float
    lam: float
    c1: float = 1.0
    c2: float = math.sqrt(0.5)

    @classmethod
    def default(cls, lam=100.0, sigma3=0.0, c2_squared=0.5):
        return cls(
            sigma111=-lam * lam,
            sigma11=0.25,
            sigma12=lam,
            sigma2=-0.5 * c2_squared,
            sigma3=sigma3,
            lam=lam,
            c1=1.0,
            c2=math.sqrt(c2_squared),
        )

    def validate(self, tol=1e-12):
        errs = []
        if abs(4 * self.sigma11 - 1.0) > tol or abs(self.c1 ** 2 - 1.0) > tol:
            errs.append("need 4*sigma11 = c1^2 = 1")
        if abs(-2 * self.sigma2 - self.c2 ** 2) > tol or not self.c2 ** 2 < 1:
            errs.append("need -2*sigma2 = c2^2 < 1")
        if not self.sigma111 < 0:
            errs.append("need sigma111 < 0")
        if not self.sigma12 > 0:
            errs.append("need sigma12 > 0")
        if not abs(self.sigma3) <= self.lam / 100 + tol:
            errs.append("need |sigma3| <= lam/100")
        if errs:
            raise CoefficientError("; ".join(errs))
        return self


def _support_points(grid, reach, plane_chunk=16):
    """Centres of the cells that meet the ball ``|x| < reach``; all other cells contribute zero."""
    out = []
    for sl in grid.chunks(plane_chunk):
        pts = grid.points(sl).reshape(-1, grid.dim)
        keep = np.einsum("ij,ij->i", pts, pts) < (reach + grid.spacing) ** 2
        out.append(pts[keep])
    return np.concatenate(out)


def _fd_curl_of_grad(x, step):
    # 4th-order central differences of grad F, then antisymmetrised
    dM = np.zeros(x.shape + (3,))  # dM[..., j, k] = d_j (d_k F)
    for j in range(3):
        e = np.zeros(3)
        e[j] = step
        m = [weightfn.moment(3, x + s * e, 1).components for s in (2, 1, -1, -2)]
        dM[:, j, :] = (-m[0] + 8 * m[1] - 8 * m[2] + m[3]) / (12 * step)
    return np.einsum("ijk,...jk->...i", LEVI_CIVITA, dM)


@dataclass
class FieldIntegrals:
    """All weighted integrals of one field at one resolution."""

    cells: int
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def field_integrals(u, cells=96, half_width=2.0, curl_step=1e-3, batch=100_000):
    """Midpoint-rule pass over the support of ``u`` accumulating every term the checks need."""
    grid = Grid(3, cells, half_width)
    if u.reach >= half_width - grid.spacing:
        raise ValueError("field support reaches the grid boundary")
    pts = _support_points(grid, u.reach)
    acc = dict.fromkeys(
        [
            "grad2", "div2", "curl2", "cross", "psi2", "div_dpsi", "A_lhs", "B_lhs",
            "q2_a", "q2_b", "e_div", "e_curl", "e_cc", "curl_fd", "curl_sym", "curl_scale",
        ],
        0.0,
    )
    for start in range(0, len(pts), batch):
        x = pts[start:start + batch]
        r = np.linalg.norm(x, axis=-1)
        F = weightfn.eval_F(3, r)
        d1 = weightfn.radial_derivative(3, 1, r)
        d2 = weightfn.radial_derivative(3, 2, r)
        M1 = d1[:, None] * x
        M2 = d2[:, None, None] * x[:, :, None] * x[:, None, :] + d1[:, None, None] * np.eye(3)

        uu, Du, D2u = u.jet(x)
        div = np.trace(Du, axis1=-2, axis2=-1)
        grad_div = np.einsum("...kki->...i", D2u)
        lap = np.einsum("...ijj->...i", D2u)
        curl = np.einsum("ijk,...kj->...i", LEVI_CIVITA, Du)
        dcurl = np.einsum("mjk,...kji->...mi", LEVI_CIVITA, D2u)  # d_i curl_m

        acc["grad2"] += np.sum(np.einsum("...ij,...ij->...", Du, Du) * F)
        acc["div2"] += np.sum(div * div * F)
        acc["curl2"] += np.sum(np.einsum("...i,...i->...", curl, curl) * F)
        acc["cross"] += np.sum(div * np.einsum("...i,...i->...", uu, M1))
        acc["psi2"] += np.sum(np.einsum("...i,...j,...ij->...", uu, uu, M2))
        acc["div_dpsi"] += np.sum(div * np.einsum("...ji,...ij->...", Du, M2))

        # sum_jk Q_jk(u^j, d_i u^k) and sum_jk Q_ik(u^k, d_j u^j)
        VA = div[:, None] * grad_div - np.einsum("...jk,...kji->...i", Du, D2u)
        VB = np.einsum("...ki,...k->...i", Du, grad_div) - grad_div * div[:, None]
        acc["A_lhs"] += np.sum(VA * M1)
        acc["B_lhs"] += np.sum(VB * M1)

        T1 = lap * div[:, None] - np.einsum("...kj,...ijk->...i", Du, D2u)
        T2 = np.einsum("...k,...ik->...i", grad_div, Du) - np.einsum("...ij,...j->...i", Du, lap)
        T3 = np.einsum("...kji,...kj->...i", D2u, Du) - np.einsum("...ki,...k->...i", Du, lap)
        T4 = grad_div * div[:, None] - np.einsum("...ji,...j->...i", Du, grad_div)
        T5 = np.einsum("...k,...ki->...i", grad_div, Du) - np.einsum("...kj,...jki->...i", Du, D2u)
        acc["q2_a"] += np.sum((2 * T1 + T2 + T3) * M1)
        acc["q2_b"] += np.sum((2 * T4 + T5) * M1)

        acc["e_div"] += np.sum(2 * div[:, None] * grad_div * M1)
        acc["e_curl"] += np.sum(2 * np.einsum("...m,...mi->...i", curl, dcurl) * M1)
        # curl(div * curl u) = grad(div) x curl u + div * curl(curl u)
        curlcurl = np.einsum("ijk,...kj->...i", LEVI_CIVITA, dcurl)
        vcc = np.cross(grad_div, curl) + div[:, None] * curlcurl
        acc["e_cc"] += np.sum(vcc * M1)

        dc = div[:, None] * curl
        acc["curl_fd"] += np.sum(dc * _fd_curl_of_grad(x, curl_step))
        acc["curl_sym"] += np.sum(dc * np.einsum("ijk,...jk->...i", LEVI_CIVITA, M2))
        acc["curl_scale"] += np.sum(np.abs(div) * np.linalg.norm(curl, axis=-1) * F)

    vol = grid.cell_volume
    return FieldIntegrals(cells, {k: float(v) * vol for k, v in acc.items()})


def _rel(a, b, scale):
    return abs(a - b) / scale if scale > 0 else abs(a - b)


@dataclass
class CurlReport:
    residual: float  # quadrature value relative to the field scale
    symbolic: float  # the same term with the exactly symmetric Hessian
    scale: float


def curl_weight_check(ints):
    """The curl-of-(omega e^{omega.x}) term, which vanishes identically."""
    s = ints["curl_scale"]
    return CurlReport(abs(ints["curl_fd"]) / s if s else abs(ints["curl_fd"]), ints["curl_sym"], s)


@dataclass
class DecompositionReport:
    lhs: float
    terms: tuple  # (div2, curl2, cross, psi2)
    measured_cross_coefficient: float
    residual: float  # relative, with the measured-exact coefficient 2
    residual_unit_cross: float  # relative, with cross coefficient 1
    bound_rhs: float  # 3/2 div2 + curl2 + 3/2 psi2
    bound_holds: bool


def grad_decomposition_identity(ints):
    """``int|grad u|^2 F = div2 + curl2 + c * cross + psi2``; exact c = 2."""
    g = ints["grad2"]
    div2, curl2, cross, psi2 = ints["div2"], ints["curl2"], ints["cross"], ints["psi2"]
    coeff = (g - div2 - curl2 - psi2) / cross if cross else math.nan
    scale = abs(g) + abs(div2) + abs(curl2) + 2 * abs(cross) + abs(psi2)
    res2 = _rel(g, div2 + curl2 + 2 * cross + psi2, scale)
    res1 = _rel(g, div2 + curl2 + cross + psi2, scale)
    bound = 1.5 * div2 + curl2 + 1.5 * psi2
    return DecompositionReport(g, (div2, curl2, cross, psi2), coeff, res2, res1, bound, g <= bound)


@dataclass
class Q1Report:
    A_lhs: float
    A_rhs: float  # cross + psi2 / 2
    A_residual: float
    B_lhs: float
    B_rhs: float  # div2 - int div (omega.grad)(u.omega) e^{omega.x}
    B_residual: float
    A_lower: float  # psi2/4 - div2
    A_lower_holds: bool
    B_mid: float  # grad2/12 + 4 div2
    B_upper: float  # 33/8 div2 + curl2/12 + psi2/8
    B_mid_holds: bool
    B_upper_holds: bool


def q1_identities(ints):
    # floor keeps the relative residual meaningful when both sides vanish identically
    floor = 1e-12 * (ints["grad2"] + ints["psi2"])
    A_rhs = ints["cross"] + 0.5 * ints["psi2"]
    B_rhs = ints["div2"] - ints["div_dpsi"]
    A_scale = abs(ints["A_lhs"]) + abs(ints["cross"]) + 0.5 * abs(ints["psi2"]) + floor
    B_scale = abs(ints["B_lhs"]) + abs(ints["div2"]) + abs(ints["div_dpsi"]) + floor
    A_lower = 0.25 * ints["psi2"] - ints["div2"]
    B_mid = ints["grad2"] / 12 + 4 * ints["div2"]
    B_upper = 33 / 8 * ints["div2"] + ints["curl2"] / 12 + ints["psi2"] / 8
    return Q1Report(
        ints["A_lhs"], A_rhs, _rel(ints["A_lhs"], A_rhs, A_scale),
        ints["B_lhs"], B_rhs, _rel(ints["B_lhs"], B_rhs, B_scale),
        A_lower, ints["A_lhs"] >= A_lower,
        B_mid, B_upper, ints["B_lhs"] <= B_mid, ints["B_lhs"] <= B_upper,
    )


def q2_integral(ints, coeffs):
    return 2 * (coeffs.sigma2 - coeffs.sigma3) * ints["q2_a"] + 2 * coeffs.sigma3 * ints["q2_b"]


@dataclass
class Q2Report:
    value: float  # |int int Q2 . omega e^{omega.x}|
    bound: float  # lam/30 * grad2
    holds: bool
    margin: float  # bound / value


def q2_bound(ints, coeffs):
    coeffs.validate()
    v = abs(q2_integral(ints, coeffs))
    b = coeffs.lam / 30 * ints["grad2"]
    return Q2Report(v, b, v <= b, b / v if v else math.inf)


@dataclass
class ElasticReport:
    lhs: float
    rhs: float
    holds: bool
    lhs_reduced: float  # lhs rebuilt from the reduced identities
    curl_product_term: float  # vanishes after integration by parts
    parts: dict = field(default_factory=dict)


def elastic_inequality(ints, coeffs):
    """Weighted nonlinear term against ``lam^2 div2 + lam curl2 + lam/2 psi2``."""
    c = coeffs.validate()
    k_div = 2 * (2 * c.sigma111 + 3 * c.sigma11)
    k_curl = 2 * (c.sigma11 - c.sigma12)
    k_cc = -4 * (c.sigma11 - c.sigma12)
    k_q1 = 4 * (2 * c.sigma12 - c.sigma11)
    q1 = k_q1 * (ints["A_lhs"] - ints["B_lhs"])
    q2 = q2_integral(ints, c)
    parts = {
        "div": k_div * ints["e_div"],
        "curl": k_curl * ints["e_curl"],
        "curl_product": k_cc * ints["e_cc"],
        "Q1": q1,
        "Q2": q2,
    }
    lhs = sum(parts.values())
    reduced = (
        -k_div * ints["div2"]
        - k_curl * ints["curl2"]
        + k_q1 * ((ints["cross"] + 0.5 * ints["psi2"]) - (ints["div2"] - ints["div_dpsi"]))
        + q2
    )
    rhs = c.lam ** 2 * ints["div2"] + c.lam * ints["curl2"] + 0.5 * c.lam * ints["psi2"]
    return ElasticReport(lhs, rhs, lhs >= rhs, reduced, parts["curl_product"], parts)


@dataclass(frozen=True)
class CheckRow:
    check: str
    resolution: int
    residual: float
    passed: bool


TOL_IDENTITY = 1e-7
TOL_CURL = 1e-8


def _field_rows(job):
    k, f, cells, coeffs = job
    ints = field_integrals(f, cells)
    c = curl_weight_check(ints)
    d = grad_decomposition_identity(ints)
    q = q1_identities(ints)
    q2 = q2_bound(ints, coeffs)
    el = elastic_inequality(ints, coeffs)
    tag = f"[{k}]"
    return [
        CheckRow("curl_weight" + tag, cells, c.residual, c.residual <= TOL_CURL),
        CheckRow("grad_decomposition" + tag, cells, d.residual, d.residual <= TOL_IDENTITY),
        CheckRow("grad_decomposition_bound" + tag, cells, d.lhs / d.bound_rhs if d.bound_rhs else 0.0, d.bound_holds),
        CheckRow("q1_jk_identity" + tag, cells, q.A_residual, q.A_residual <= TOL_IDENTITY),
        CheckRow("q1_ik_identity" + tag, cells, q.B_residual, q.B_residual <= TOL_IDENTITY),
        CheckRow("q1_jk_lower_bound" + tag, cells, q.A_lhs - q.A_lower, q.A_lower_holds),
        CheckRow("q1_ik_upper_bound" + tag, cells, q.B_upper - q.B_lhs, q.B_upper_holds),
        CheckRow("q2_bound" + tag, cells, q2.value / q2.bound if q2.bound else 0.0, q2.holds),
        CheckRow("elastic_inequality" + tag, cells, el.lhs / el.rhs if el.rhs else 0.0, el.holds),
    ]


def elastic_rows(fields, cells=96, coeffs=None, jobs=1):
    """Check rows for every field; ``jobs > 1`` spreads fields over worker processes."""
    coeffs = ElasticCoeffs.default() if coeffs is None else coeffs
    work = [(k, f, cells, coeffs) for k, f in enumerate(fields)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_field_rows, work))
    else:
        parts = [_field_rows(w) for w in work]
    return [row for part in parts for row in part]
