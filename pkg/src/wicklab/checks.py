"""Named verification checks and convergence sweeps over every module.

Each check builds its own objects from the suite configuration, records
the parameters it actually used, and returns named defect values; a check
passes when every defect is at or below its tolerance.  Checks based on
exact identities share the generic tolerance; the dense matrix-exponential
comparison is intrinsically looser and sits outside the default suite.
"""

import math

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .fock import (
    SparseOperator,
    ampliate,
    diff_second_quantize,
    enumerate_basis,
    exponential_vector,
    field_operator,
    identity_operator,
    second_quantize,
    spectral_norm,
    split_isomorphism,
    tensor_oracle_compare,
    vacuum_vector,
)
from .grid import (
    OneParticleVector,
    build_grid,
    inner_product,
    one_particle_hamiltonian,
    project,
    projection_matrix,
    sample_function,
)
from .processes import (
    ProcessFamily,
    adaptedness_defect,
    bin_increment,
    fermi_process,
    parity_process,
    spectral_process,
)
from .unify import (
    build_xi,
    field_covariance_defect,
    isometry_defects,
    leakage_closed_form,
    number_covariance_defect,
    ordered_product_defect,
)
from .wick import (
    EXACT_PAIRS,
    NULL_PAIRS,
    AdaptedStepProcess,
    WickIntegrand,
    abel_defect,
    adjoint_integral,
    estimate_bound,
    ito_correction_defect,
    ito_table_probe,
    matrix_element_form,
    wick_integral,
    _probe_vector,
)

GENERIC_TOL = 1e-10


def _cfg_grid(cfg, bins=None):
    return build_grid(
        cfg.omega_max, cfg.bins if bins is None else bins, cfg.internal_dims
    )


def _unit(rng, n, scale=1.0):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return scale * v / np.linalg.norm(v)


def _unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _vec_log(v):
    """Loggable form of a small complex vector."""
    return {"re": [float(x) for x in v.real], "im": [float(x) for x in v.imag]}


def check_grid_projection_algebra(cfg, rng):
    grid = _cfg_grid(cfg)
    e = grid.bin_edges
    q = min(max(1, grid.bins // 4), grid.bins)
    m = min(max(q, grid.bins // 2), grid.bins)
    pa = projection_matrix(grid, e[0], e[m])
    pb = projection_matrix(grid, e[q], e[grid.bins])
    pab = projection_matrix(grid, e[q], e[m])
    h = one_particle_hamiltonian(grid)
    norm = lambda x: float(np.linalg.norm(x, 2)) if x.size else 0.0
    defects = {
        "idempotent": norm(pa @ pa - pa),
        "self_adjoint": norm(pa - pa.conj().T),
        "intersection": norm(pa @ pb - pab),
        "hamiltonian_commutes": norm(h @ pa - pa @ h),
    }
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "window_edges": [0, q, m, grid.bins]}
    return params, defects


def check_fock_tensor_oracle(cfg, rng):
    grid = _cfg_grid(cfg)
    d = min(grid.num_modes, 3)
    n = min(cfg.truncation, 3)
    defects = {}
    for statistics in ("bose", "fermi"):
        res = tensor_oracle_compare(statistics, d, n, seed=cfg.seed)
        for key, val in res.items():
            if key != "max":
                defects[f"{statistics}_{key}"] = val
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": d, "grades": n, "oracle_seed": cfg.seed}
    return params, defects


def check_fock_ccr(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    eye = identity_operator(basis)
    worst = 0.0
    adjoint = 0.0
    for _ in range(20):
        f = _unit(rng, basis.num_modes)
        g = _unit(rng, basis.num_modes)
        bm = field_operator(basis, "annihilate", f)
        bp = field_operator(basis, "create", g)
        comm = bm.commutator(bp) - complex(np.vdot(f, g)) * eye
        worst = max(worst, comm.norm(grade_cap=basis.truncation - 1))
        dag_gap = field_operator(basis, "create", f).dag().matrix - bm.matrix
        adjoint = max(adjoint, spectral_norm(dag_gap))
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": basis.num_modes, "truncation": basis.truncation,
              "pairs": 20}
    return params, {"commutator": worst, "adjoint": adjoint}


def check_fock_car(cfg, rng):
    grid = _cfg_grid(cfg)
    d = grid.num_modes
    basis = enumerate_basis("fermi", d, d)  # M = D: no truncation effects
    eye = identity_operator(basis)
    anti = 0.0
    square = 0.0
    for _ in range(20):
        f = _unit(rng, d)
        g = _unit(rng, d)
        fm = field_operator(basis, "annihilate", f)
        fp = field_operator(basis, "create", g)
        gap = fm.anticommutator(fp) - complex(np.vdot(f, g)) * eye
        anti = max(anti, gap.norm())
        sq = field_operator(basis, "create", f).anticommutator(fp)
        square = max(square, sq.norm())
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": d, "truncation": d, "pairs": 20}
    return params, {"anticommutator": anti, "creator_square": square}


def check_fock_exponential(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    m = basis.truncation
    partial_gap = 0.0
    tail_excess = 0.0
    for _ in range(20):
        f = _unit(rng, basis.num_modes, scale=1.1)
        g = _unit(rng, basis.num_modes, scale=0.9)
        ip = complex(np.vdot(exponential_vector(basis, f),
                             exponential_vector(basis, g)))
        z = complex(np.vdot(f, g))
        partial = sum(z ** n / math.factorial(n) for n in range(m + 1))
        partial_gap = max(partial_gap, abs(ip - partial))
        bound = abs(z) ** (m + 1) / math.factorial(m + 1) * math.exp(abs(z))
        tail_excess = max(tail_excess, abs(ip - np.exp(z)) - bound)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": basis.num_modes, "truncation": m, "pairs": 20}
    return params, {"partial_sum": partial_gap,
                    "tail_bound_excess": max(0.0, tail_excess)}


def check_fock_gamma_functor(cfg, rng):
    grid = _cfg_grid(cfg)
    d = min(grid.num_modes, 4)
    m = min(cfg.truncation, 3)
    defects = {}
    for statistics in ("bose", "fermi"):
        basis = enumerate_basis(statistics, d, m if statistics == "bose" else min(m, d))
        u = _unitary(rng, d)
        v = _unitary(rng, d)
        prod_gap = second_quantize(basis, u @ v).matrix \
            - (second_quantize(basis, u) @ second_quantize(basis, v)).matrix
        defects[f"{statistics}_product"] = spectral_norm(prod_gap)
        f = _unit(rng, d)
        g = _unit(rng, d)
        rank_one = diff_second_quantize(basis, np.outer(f, np.conj(g)))
        pair = field_operator(basis, "create", f) @ field_operator(basis, "annihilate", g)
        defects[f"{statistics}_rank_one"] = spectral_norm(rank_one.matrix - pair.matrix)
        gu = second_quantize(basis, u)
        gud = second_quantize(basis, np.conj(u).T)
        phi = _unit(rng, d)
        for kind in ("create", "annihilate"):
            lhs = gu @ field_operator(basis, kind, phi) @ gud
            rhs = field_operator(basis, kind, u @ phi)
            defects[f"{statistics}_covariance_{kind}"] = spectral_norm(
                lhs.matrix - rhs.matrix
            )
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": d, "truncation": m}
    return params, defects


def check_fock_gamma_exponential(cfg, rng):
    grid = _cfg_grid(cfg)
    d = min(grid.num_modes, 3)
    m = min(cfg.truncation, 3)
    t = 0.7
    defects = {}
    for statistics in ("bose", "fermi"):
        basis = enumerate_basis(statistics, d, m if statistics == "bose" else min(m, d))
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (a + np.conj(a).T) / 2.0
        h /= np.linalg.norm(h, 2)
        lhs = scipy.linalg.expm(1j * t * diff_second_quantize(basis, h).matrix.toarray())
        rhs = second_quantize(basis, scipy.linalg.expm(1j * t * h)).matrix.toarray()
        defects[statistics] = float(np.linalg.norm(lhs - rhs, 2))
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": d, "truncation": m, "t": t}
    return params, defects


def check_fock_factorization(cfg, rng):
    grid = _cfg_grid(cfg)
    d = grid.num_modes
    defects = {}
    for statistics in ("bose", "fermi"):
        m = cfg.truncation if statistics == "bose" else min(cfg.truncation, d)
        basis = enumerate_basis(statistics, d, m)
        f = _unit(rng, d)
        field = field_operator(basis, "create", f)
        worst = 0.0
        for k in range(1, grid.bins):
            num_low = int(grid.mode_offsets[k])
            if num_low < 1 or num_low >= d:
                continue
            iso = split_isomorphism(basis, num_low)
            low, high = iso.low, iso.high
            bl = field_operator(low, "create", f[:num_low]).matrix
            bh = field_operator(high, "create", f[num_low:]).matrix
            il = sp.identity(low.dim, dtype=np.complex128, format="csr")
            ih = sp.identity(high.dim, dtype=np.complex128, format="csr")
            if statistics == "bose":
                left_factor = il
            else:
                # global mode order puts the parity twist on the low factor
                left_factor = sp.diags(
                    (1.0 - 2.0 * (low.grades & 1)).astype(np.complex128), 0,
                    format="csr",
                )
            joined = (iso.pull_back(bl, ih) + iso.pull_back(left_factor, bh)).matrix
            worst = max(worst, spectral_norm(field.matrix - joined))
            worst = max(
                worst, spectral_norm(field.dag().matrix - joined.getH().tocsr())
            )
        defects[statistics] = worst
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": d, "truncation": cfg.truncation,
              "cuts": list(range(1, grid.bins))}
    return params, defects


def check_process_consistency(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    scale = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda w: scale * np.exp(1j * w))
    sum_gap = 0.0
    window_gap = 0.0
    adapted = 0.0
    dagger_gap = 0.0
    kinds = ("create", "annihilate", "conserve", "fermi-create", "fermi-annihilate")
    for kind in kinds:
        fam = ProcessFamily(grid, basis, kind, None if kind == "conserve" else phi)
        running = None
        for k in range(1, grid.bins + 1):
            edge = grid.bin_edges[k]
            inc = fam.increment(k - 1)
            running = inc if running is None else running + inc
            full = fam.at(edge)
            sum_gap = max(sum_gap, (full - running).norm())
            adapted = max(adapted, adaptedness_defect(full, grid, edge))
        if kind in ("create", "annihilate"):
            cut = grid.bin_edges[grid.bins // 2 or 1]
            direct = field_operator(
                basis, kind, project(phi, grid.bin_edges[0], cut).coeffs
            )
            window_gap = max(
                window_gap, (fam.at(cut) - direct).norm()
            )
    top = grid.bin_edges[-1]
    fplus = fermi_process(grid, basis, "create", phi, top)
    fminus = fermi_process(grid, basis, "annihilate", phi, top)
    dagger_gap = spectral_norm(fplus.dag().matrix - fminus.matrix)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation,
              "kinds": list(kinds)}
    return params, {"increment_sum": sum_gap, "window_field": window_gap,
                    "adaptedness": adapted, "fermi_dagger": dagger_gap}


def check_process_parity(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    commute = 0.0
    vacuum = 0.0
    recursion = 0.0
    analytic = 0.0
    differential = 0.0
    vac = vacuum_vector(basis)
    f = lambda lam: lam * lam + 0.5 * lam  # a generic polynomial on counts
    for k in range(1, grid.bins + 1):
        ja = parity_process(grid, basis, grid.bin_edges[k])
        jb = parity_process(grid, basis, grid.bin_edges[k // 2])
        commute = max(commute, ja.commutator(jb).norm())
        vacuum = max(vacuum, float(np.linalg.norm(ja.matrix @ vac - vac)))
        j_prev = parity_process(grid, basis, grid.bin_edges[k - 1])
        dlam = bin_increment(grid, basis, "conserve", k - 1)
        bin_counts = np.asarray(dlam.matrix.diagonal()).real
        flip = sp.diags(1.0 - 2.0 * (bin_counts.astype(np.int64) & 1), 0, format="csr")
        recursion = max(
            recursion, spectral_norm(ja.matrix - j_prev.matrix @ flip)
        )
        lam_prev = np.asarray(
            spectral_process(grid, basis, "conserve",
                             omega=grid.bin_edges[k - 1]).matrix.diagonal()
        ).real
        lam_next = lam_prev + bin_counts
        exact_diff = f(lam_next) - f(lam_prev)
        claimed = (f(lam_prev + 1.0) - f(lam_prev)) * bin_counts
        single = bin_counts <= 1.0
        analytic = max(
            analytic, float(np.max(np.abs((exact_diff - claimed)[single])))
        )
        jump = np.asarray((ja.matrix - j_prev.matrix).diagonal())
        minus_two = -2.0 * np.asarray(j_prev.matrix.diagonal()) * bin_counts
        differential = max(
            differential, float(np.max(np.abs((jump - minus_two)[single])))
        )
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation}
    return params, {"commutation": commute, "vacuum": vacuum,
                    "recursion": recursion, "analytic_rule": analytic,
                    "differential_rule": differential}


def check_process_anticommutation(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    scale = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda w: scale * np.exp(2j * w))
    worst = 0.0
    for k in range(1, grid.bins + 1):
        omega = grid.bin_edges[k]
        j = parity_process(grid, basis, omega)
        for kind in ("create", "annihilate"):
            fop = fermi_process(grid, basis, kind, phi, omega)
            worst = max(worst, j.anticommutator(fop).norm())
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation}
    return params, {"anticommutator": worst}


def check_process_car_uniform(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, max(cfg.truncation, 2))
    scale = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda w: scale)
    top = grid.bin_edges[-1]
    fp = fermi_process(grid, basis, "create", phi, top)
    fm = fermi_process(grid, basis, "annihilate", phi, top)
    gap = fm.anticommutator(fp) - complex(inner_product(phi, phi)) * identity_operator(basis)
    one_particle = basis.grades == 1
    block = gap.matrix[np.flatnonzero(one_particle)][:, np.flatnonzero(one_particle)]
    measured = spectral_norm(block.tocsr())
    n = grid.num_modes
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": n, "truncation": basis.truncation}
    return params, {"one_particle_gap": abs(measured - 2.0 / n)}


def _random_adapted_step(grid, basis, initial_dim, rng, scale):
    """Two-piece adapted process: initial-space part plus a field part
    supported strictly below each piece's left breakpoint."""
    mid = grid.bins // 2
    breaks = [grid.bin_edges[0], grid.bin_edges[mid], grid.bin_edges[-1]]
    if mid == 0:
        breaks = [grid.bin_edges[0], grid.bin_edges[-1]]
    pieces = []
    for edge_idx in ([0, mid] if mid > 0 else [0]):
        cut = int(grid.mode_offsets[edge_idx])
        f = np.zeros(grid.num_modes, dtype=np.complex128)
        if cut:
            f[:cut] = scale * (rng.standard_normal(cut) + 1j * rng.standard_normal(cut))
        fld = field_operator(basis, "create", f) \
            + field_operator(basis, "annihilate", np.conj(f))
        a0 = rng.standard_normal((initial_dim, initial_dim)) \
            + 1j * rng.standard_normal((initial_dim, initial_dim))
        a0 /= np.linalg.norm(a0, 2)
        mat = sp.kron(sp.csr_matrix(a0), identity_operator(basis).matrix, format="csr") \
            + sp.kron(sp.identity(initial_dim, format="csr"), fld.matrix, format="csr")
        pieces.append(SparseOperator(mat.tocsr(), basis, initial_dim))
    return AdaptedStepProcess(grid, breaks, pieces, validate=False)


def _random_integrand(grid, basis, initial_dim, rng, scale=0.1):
    x11 = _random_adapted_step(grid, basis, initial_dim, rng, scale)
    x10 = _random_adapted_step(grid, basis, initial_dim, rng, scale)
    x01 = _random_adapted_step(grid, basis, initial_dim, rng, scale)
    x00 = _random_adapted_step(grid, basis, initial_dim, rng, scale)
    w = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda om: 0.5 * w * np.exp(1j * om))
    psi = sample_function(grid, lambda om: 0.4 * w / (1.0 + om))
    return WickIntegrand(grid, basis, x11=x11, x10=x10, x01=x01, x00=x00,
                         phi=phi, psi=psi, initial_dim=initial_dim)


def check_wick_route(cfg, rng):
    grid = _cfg_grid(cfg)
    m = max(cfg.truncation, 5)
    basis = enumerate_basis("bose", grid.num_modes, m)
    h0 = 2
    integrand = _random_integrand(grid, basis, h0, rng)
    total = wick_integral(integrand, grid.omega_max)
    worst = 0.0
    probe_scale = 5e-3
    for _ in range(3):
        u = _unit(rng, h0)
        v = _unit(rng, h0)
        fv = _unit(rng, grid.num_modes, scale=probe_scale)
        gv = _unit(rng, grid.num_modes, scale=probe_scale)
        f = OneParticleVector(grid, fv)
        g = OneParticleVector(grid, gv)
        direct = matrix_element_form(integrand, grid.omega_max, u, f, v, g)
        bra = _probe_vector(u, exponential_vector(basis, f.coeffs))
        ket = _probe_vector(v, exponential_vector(basis, g.coeffs))
        assembled = complex(np.vdot(bra, total.matrix @ ket))
        worst = max(worst, abs(direct - assembled))
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": m,
              "probe_scale": probe_scale, "panels": 3}
    return params, {"route": worst}


def check_wick_adjoint(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    integrand = _random_integrand(grid, basis, 2, rng)
    total = wick_integral(integrand, grid.omega_max)
    starred = adjoint_integral(integrand, grid.omega_max, starred=True)
    gap = (starred - total.dag()).norm(grade_cap=basis.truncation - 1)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation}
    return params, {"starred_vs_dagger": gap}


def check_wick_abel(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    x = _random_integrand(grid, basis, 2, rng)
    y = _random_integrand(grid, basis, 2, rng)
    gap = abel_defect(x, y, grid.omega_max)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation}
    return params, {"abel": gap}


def check_wick_ito_exact(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, max(cfg.truncation, 3))
    w = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda om: w * (0.4 + 0.1j * om))
    psi = sample_function(grid, lambda om: w * 0.3 * np.exp(-om))
    f = sample_function(grid, lambda om: w * (0.2 + 0.05 * om))
    g = sample_function(grid, lambda om: w * (0.25 - 0.04j * om))
    j = grid.bins // 2
    worst = 0.0
    per_pair = {}
    for row, col in EXACT_PAIRS:
        emp, pred = ito_table_probe(grid, basis, row, col, j, phi, psi, f, g)
        per_pair[f"{row}_{col}"] = abs(emp - pred)
        worst = max(worst, abs(emp - pred))
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": max(cfg.truncation, 3),
              "bin": j}
    return params, per_pair


def check_wick_bound(cfg, rng):
    grid = _cfg_grid(cfg)
    basis = enumerate_basis("bose", grid.num_modes, cfg.truncation)
    h0 = 2
    worst = 0.0
    trials = 20
    for _ in range(trials):
        integrand = _random_integrand(grid, basis, h0, rng)
        u = _unit(rng, h0)
        f = OneParticleVector(grid, _unit(rng, grid.num_modes, scale=0.5))
        lhs, rhs = estimate_bound(integrand, grid.omega_max, u, f)
        worst = max(worst, lhs - rhs)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": cfg.truncation,
              "trials": trials}
    return params, {"bound_excess": max(0.0, worst)}


def check_xi_unitarity(cfg, rng):
    grid = _cfg_grid(cfg)
    m = min(cfg.truncation, grid.num_modes)
    xi = build_xi(grid, m)
    defects = isometry_defects(xi)
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": m}
    return params, defects


def check_xi_covariance(cfg, rng):
    grid = _cfg_grid(cfg)
    m = min(max(cfg.truncation, 2), grid.num_modes)
    xi = build_xi(grid, m)
    w = 1.0 / np.sqrt(grid.omega_max)
    phi = sample_function(grid, lambda om: w * np.exp(1j * om) / (1.0 + om))
    cov = field_covariance_defect(xi, phi, grid.omega_max)
    closed = leakage_closed_form(phi, grid.omega_max, m)
    uniform = sample_function(grid, lambda om: w)
    cov_u = field_covariance_defect(xi, uniform, grid.omega_max)
    n = grid.num_modes
    defects = {
        "create": cov["create"],
        "annihilate": cov["annihilate"],
        "leakage_closed_form_gap": abs(cov["leakage"] - closed),
        "uniform_one_particle_gap": abs(
            cov_u["leakage_one_particle"] - np.sqrt(2.0 / n)
        ),
    }
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": n, "truncation": m}
    return params, defects


def check_xi_number(cfg, rng):
    grid = _cfg_grid(cfg)
    m = min(cfg.truncation, grid.num_modes)
    xi = build_xi(grid, m)
    worst = 0.0
    for k in range(grid.bins + 1):
        worst = max(worst, number_covariance_defect(xi, grid.bin_edges[k]))
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": m}
    return params, {"number": worst}


def check_xi_sign_consistency(cfg, rng):
    import itertools as it

    grid = _cfg_grid(cfg)
    d = min(grid.num_modes, 4)
    small = build_grid(grid.omega_max, d, 1)
    n_max = min(3, d)
    xi = build_xi(small, max(n_max, 2))
    top = small.bin_edges[-1]
    worst = 0.0
    vac_b = vacuum_vector(xi.bose)
    vac_f = vacuum_vector(xi.fermi)
    for n in range(1, n_max + 1):
        for modes in it.permutations(range(d), n):
            vb = vac_b
            vf = vac_f
            for mode in reversed(modes):
                e = np.zeros(d, dtype=np.complex128)
                e[mode] = 1.0
                vb = fermi_process(small, xi.bose, "create",
                                   OneParticleVector(small, e), top).matrix @ vb
                vf = field_operator(xi.fermi, "create", e).matrix @ vf
            worst = max(worst, float(np.linalg.norm(xi.matrix @ vb - vf)))
    params = {"bins": d, "delta_omega": float(small.widths.max()),
              "modes": d, "max_factors": n_max}
    return params, {"sign": worst}


def check_xi_ordered_disjoint(cfg, rng):
    grid = _cfg_grid(cfg)
    m = max(2, min(cfg.truncation, grid.num_modes))
    n = min(3, grid.bins, m)
    basis = enumerate_basis("bose", grid.num_modes, m)
    groups = np.array_split(np.arange(grid.bins), n)
    phis = []
    for i, bins_i in enumerate(groups):
        f = np.zeros(grid.num_modes, dtype=np.complex128)
        for j in bins_i:
            sl = grid.bin_modes(int(j))
            f[sl] = rng.standard_normal() + 1j * rng.standard_normal()
        phis.append(OneParticleVector(grid, f))
    defects = {}
    for direction in ("fermi-from-bose", "bose-from-fermi"):
        defects[direction.replace("-", "_")] = ordered_product_defect(
            grid, basis, phis, grid.omega_max, direction
        )
    params = {"bins": grid.bins, "delta_omega": float(grid.widths.max()),
              "modes": grid.num_modes, "truncation": m, "factors": n,
              "supports": [[int(j) for j in g] for g in groups]}
    return params, defects


# name -> (function, default tolerance, include in default verify suite)
CHECKS = {
    "grid-projection-algebra": (check_grid_projection_algebra, GENERIC_TOL, True),
    "fock-tensor-oracle": (check_fock_tensor_oracle, GENERIC_TOL, True),
    "fock-ccr": (check_fock_ccr, GENERIC_TOL, True),
    "fock-car": (check_fock_car, GENERIC_TOL, True),
    "fock-exponential": (check_fock_exponential, GENERIC_TOL, True),
    "fock-gamma-functor": (check_fock_gamma_functor, GENERIC_TOL, True),
    "fock-gamma-exponential": (check_fock_gamma_exponential, 1e-8, False),
    "fock-factorization": (check_fock_factorization, GENERIC_TOL, True),
    "process-consistency": (check_process_consistency, GENERIC_TOL, True),
    "process-parity": (check_process_parity, GENERIC_TOL, True),
    "process-anticommutation": (check_process_anticommutation, GENERIC_TOL, True),
    "process-car-uniform": (check_process_car_uniform, GENERIC_TOL, True),
    "wick-route": (check_wick_route, GENERIC_TOL, True),
    "wick-adjoint": (check_wick_adjoint, GENERIC_TOL, True),
    "wick-abel": (check_wick_abel, GENERIC_TOL, True),
    "wick-ito-exact": (check_wick_ito_exact, GENERIC_TOL, True),
    "wick-bound": (check_wick_bound, GENERIC_TOL, True),
    "xi-unitarity": (check_xi_unitarity, GENERIC_TOL, True),
    "xi-covariance": (check_xi_covariance, GENERIC_TOL, True),
    "xi-number": (check_xi_number, GENERIC_TOL, True),
    "xi-sign-consistency": (check_xi_sign_consistency, GENERIC_TOL, True),
    "xi-ordered-disjoint": (check_xi_ordered_disjoint, GENERIC_TOL, True),
}


def default_check_names():
    return [name for name, (_, _, default) in CHECKS.items() if default]


def run_check(name, cfg):
    """Run one named check with its own deterministic substream."""
    func, tol, _ = CHECKS[name]
    index = list(CHECKS).index(name)
    rng = np.random.default_rng([cfg.seed, index])
    params, defects = func(cfg, rng)
    params["rng_key"] = [cfg.seed, index]
    return params, defects, tol


# ---------------------------------------------------------------------------
# Convergence sweeps: each returns {series_label: [(bins, delta_omega, defect)]}


def sweep_quadrature(cfg):
    import scipy.integrate

    phi = lambda w: np.exp(1j * w) / (1.0 + w)
    psi = lambda w: np.cos(w) + 0.5j * np.sin(2 * w)
    integrand = lambda w: np.conj(phi(w)) * psi(w)
    re, _ = scipy.integrate.quad(lambda w: integrand(w).real, 0, cfg.omega_max)
    im, _ = scipy.integrate.quad(lambda w: integrand(w).imag, 0, cfg.omega_max)
    exact = re + 1j * im
    out = []
    for n in cfg.bins_list:
        grid = _cfg_grid(cfg, bins=n)
        u = sample_function(grid, phi)
        v = sample_function(grid, psi)
        out.append((n, float(grid.widths.max()), abs(inner_product(u, v) - exact)))
    return {"": out}


def _car_sweep_ops(cfg, n):
    # truncation 3 so the grade <= 2 measurement window is free of
    # top-grade truncation artifacts
    grid = _cfg_grid(cfg, bins=n)
    basis = enumerate_basis("bose", grid.num_modes, 3)
    w = 1.0 / np.sqrt(cfg.omega_max)
    phi = sample_function(grid, lambda om: w * np.exp(1j * om))
    psi = sample_function(grid, lambda om: w * (1.0 + 0.3 * om) / np.sqrt(1.0 + 0.3 * cfg.omega_max + 0.03 * cfg.omega_max ** 2))
    top = grid.bin_edges[-1]
    return grid, basis, phi, psi, top


def sweep_car_anticommutator(cfg):
    out = []
    for n in cfg.bins_list:
        grid, basis, phi, psi, top = _car_sweep_ops(cfg, n)
        fm = fermi_process(grid, basis, "annihilate", phi, top)
        fp = fermi_process(grid, basis, "create", psi, top)
        gap = fm.anticommutator(fp) - complex(inner_product(phi, psi)) * identity_operator(basis)
        out.append((n, float(grid.widths.max()), gap.norm(grade_cap=2)))
    return {"": out}


def sweep_car_square(cfg):
    out = []
    for n in cfg.bins_list:
        grid, basis, phi, psi, top = _car_sweep_ops(cfg, n)
        fp1 = fermi_process(grid, basis, "create", phi, top)
        fp2 = fermi_process(grid, basis, "create", psi, top)
        out.append((n, float(grid.widths.max()),
                    fp1.anticommutator(fp2).norm(grade_cap=2)))
    return {"": out}


def sweep_ito_null(cfg):
    series = {f"{row},{col}": [] for row, col in NULL_PAIRS}
    for n in cfg.bins_list:
        grid = _cfg_grid(cfg, bins=n)
        basis = enumerate_basis("bose", grid.num_modes, 3)
        w = 1.0 / np.sqrt(cfg.omega_max)
        phi = sample_function(grid, lambda om: w * (0.4 + 0.1j * om))
        psi = sample_function(grid, lambda om: w * 0.3 * np.exp(-om))
        f = sample_function(grid, lambda om: w * (0.2 + 0.05 * om))
        g = sample_function(grid, lambda om: w * (0.25 - 0.04j * om))
        j = n // 2
        for row, col in NULL_PAIRS:
            emp, _ = ito_table_probe(grid, basis, row, col, j, phi, psi, f, g)
            series[f"{row},{col}"].append((n, float(grid.widths.max()), abs(emp)))
    return series


def sweep_ito_correction(cfg):
    out = []
    for n in cfg.bins_list:
        grid = _cfg_grid(cfg, bins=n)
        basis = enumerate_basis("bose", grid.num_modes, 3)
        w = 1.0 / np.sqrt(cfg.omega_max)
        phi = sample_function(grid, lambda om: w * 0.5 * np.exp(1j * om))
        psi = sample_function(grid, lambda om: w * 0.4 / (1.0 + om))
        ident = AdaptedStepProcess.constant(
            grid, identity_operator(basis), validate=False
        )
        x = WickIntegrand(grid, basis, x01=ident, psi=psi)
        y = WickIntegrand(grid, basis, x10=ident, phi=phi)
        f = sample_function(grid, lambda om: w * (0.2 + 0.1j * om))
        g = sample_function(grid, lambda om: w * (0.3 - 0.05j * om))
        u = np.ones(1, dtype=np.complex128)
        panel = [(u, f, u, g)]
        out.append((n, float(grid.widths.max()),
                    ito_correction_defect(x, y, grid.omega_max, panel)))
    return {"": out}


def sweep_xi_leakage(cfg):
    out = []
    for n in cfg.bins_list:
        grid = _cfg_grid(cfg, bins=n)
        m = min(3, grid.num_modes)
        xi = build_xi(grid, max(m, 2))
        w = 1.0 / np.sqrt(cfg.omega_max)
        phi = sample_function(grid, lambda om: w * np.exp(1j * om))
        cov = field_covariance_defect(xi, phi, grid.omega_max)
        out.append((n, float(grid.widths.max()), cov["leakage_one_particle"]))
    return {"": out}


def sweep_ordered_overlap(cfg):
    out = []
    for n in cfg.bins_list:
        grid = _cfg_grid(cfg, bins=n)
        basis = enumerate_basis("bose", grid.num_modes, 2)
        w = 1.0 / np.sqrt(cfg.omega_max)
        phi = sample_function(grid, lambda om: w * (0.8 + 0.2 * np.cos(om)))
        defect = ordered_product_defect(
            grid, basis, [phi, phi], grid.omega_max, "bose-from-fermi"
        )
        out.append((n, float(grid.widths.max()), defect))
    return {"": out}


# name -> (function, (slope_lo, slope_hi)); slope is of defect vs delta_omega
SWEEPS = {
    "quadrature": (sweep_quadrature, (0.9, None)),
    "car-anticommutator": (sweep_car_anticommutator, (0.8, 1.2)),
    "car-square": (sweep_car_square, (0.3, 0.7)),
    "ito-null": (sweep_ito_null, (1.8, None)),
    "ito-correction": (sweep_ito_correction, (0.8, 1.2)),
    "xi-leakage": (sweep_xi_leakage, (0.3, 0.7)),
    "ordered-overlap": (sweep_ordered_overlap, (0.3, 0.7)),
}


def default_sweep_names():
    return list(SWEEPS)


def run_sweep(name, cfg):
    func, band = SWEEPS[name]
    return func(cfg), band
