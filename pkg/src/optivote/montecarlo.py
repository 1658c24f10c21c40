"""Monte Carlo verification harness tying the simulator to the theory.

Each check draws its samples from seed-derived streams, compares an
empirical statistic against its closed form, and records the pass rule in
the report so a failure is self-explaining.  Bound checks are one-sided:
the closed forms are conservative upper bounds, so the simulator must
never exceed them (plus 3 standard errors of slack).
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import channel as ch
from . import theory
from .errors import UsageError
from .rng import TAG_MC, derive


@dataclass(frozen=True)
class McReport:
    name: str
    samples: int
    empirical: float
    theoretical: float
    standard_error: float
    passed: bool
    tolerance_rule: str

    def to_dict(self) -> dict:
        d = asdict(self)
        # numpy scalars sneak in through vectorized comparisons; keep the
        # serialized report plain-JSON typed.
        d["empirical"] = float(d["empirical"])
        d["theoretical"] = float(d["theoretical"])
        d["standard_error"] = float(d["standard_error"])
        d["passed"] = bool(d["passed"])
        return d


def _binomial_se(rate: float, samples: int) -> float:
    return float(np.sqrt(max(rate * (1.0 - rate), 1e-12) / samples))


def unit_channel(xi_snr: float, a0: float = 0.9, xi_p: float = 1.5) -> ch.ChannelParams:
    """Channel with geometric efficiency normalized to 1 and sigma_n2 set
    so the effective SNR theta / sigma_n2 (at p_avg = 1) equals xi_snr."""
    d_min, d_max = 500e3, 2000e3
    c_fspl = (d_max**3 - d_min**3) / (3.0 * (d_max - d_min))
    lam = ch.lambda_eff(ch.ChannelParams(d_min, d_max, a0=a0, xi_p=xi_p, c_fspl=c_fspl))
    return ch.ChannelParams(
        d_min, d_max, a0=a0, xi_p=xi_p, sigma_n2=lam / xi_snr, c_fspl=c_fspl
    )


def verify_energy_means(
    params: ch.ChannelParams,
    m_plus: int,
    m_minus: int,
    samples: int,
    p_avg: float = 1.0,
    seed: int = 0,
) -> list[McReport]:
    """Empirical slot-energy means for a fixed vote split vs. closed form."""
    if samples < 10_000:
        raise UsageError("need at least 1e4 samples")
    lam = ch.lambda_eff(params)
    th = theory.theta(p_avg, lam)
    mu_plus, mu_minus = theory.energy_means(m_plus, m_minus, th, params.sigma_n2)
    rng = derive(seed, TAG_MC, 1)
    std_n = np.sqrt(params.sigma_n2)

    reports = []
    for slot, count, mu in (("plus", m_plus, mu_plus), ("minus", m_minus, mu_minus)):
        if count > 0:
            intens = ch.sample_intensities(params, rng, samples * count)
            signal = p_avg * intens.reshape(samples, count).sum(axis=1)
        else:
            signal = np.zeros(samples)
        e = signal + params.sigma_n2 + rng.normal(0.0, std_n, size=samples)
        emp = float(e.mean())
        se = float(e.std(ddof=1) / np.sqrt(samples))
        reports.append(
            McReport(
                name=f"energy_mean_{slot}[m+={m_plus},m-={m_minus}]",
                samples=samples,
                empirical=emp,
                theoretical=mu,
                standard_error=se,
                passed=abs(emp - mu) <= 3.0 * se,
                tolerance_rule="|empirical - theoretical| <= 3 SE (two-sided)",
            )
        )
    return reports


def _simulate_flips(
    M: int,
    q_i: float,
    params: ch.ChannelParams,
    samples: int,
    p_avg: float,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized vote/transmit/detect rounds with true sign +1.

    Returns (flip indicator per sample, correct-vote count per sample).
    """
    correct = rng.random((samples, M)) >= q_i  # True -> vote +1
    intens = ch.sample_intensities(params, rng, samples * M).reshape(samples, M)
    amp = p_avg * intens
    e_plus = (amp * correct).sum(axis=1)
    e_minus = (amp * ~correct).sum(axis=1)
    if params.sigma_n2 > 0:
        std = np.sqrt(params.sigma_n2)
        e_plus = e_plus + params.sigma_n2 + rng.normal(0.0, std, size=samples)
        e_minus = e_minus + params.sigma_n2 + rng.normal(0.0, std, size=samples)
    flips = (e_plus - e_minus) < 0.0
    return flips, correct.sum(axis=1)


def verify_error_bound(
    M: int,
    q_i: float,
    params: ch.ChannelParams,
    samples: int,
    p_avg: float = 1.0,
    seed: int = 0,
) -> McReport:
    """Empirical MV flip rate vs. the closed-form upper bound."""
    if not (0.0 < q_i < 0.5):
        raise UsageError("q_i must lie in (0, 1/2)")
    if samples < 10_000:
        raise UsageError("need at least 1e4 samples")
    lam = ch.lambda_eff(params)
    xi = theory.theta(p_avg, lam) / params.sigma_n2
    bound = theory.error_bound(M, xi, q_i)
    rng = derive(seed, TAG_MC, 2, M, int(q_i * 1e6))
    flips, _ = _simulate_flips(M, q_i, params, samples, p_avg, rng)
    rate = float(flips.mean())
    se = _binomial_se(rate, samples)
    return McReport(
        name=f"error_bound[M={M},xi={xi:.3g},q={q_i}]",
        samples=samples,
        empirical=rate,
        theoretical=bound,
        standard_error=se,
        passed=rate <= bound + 3.0 * se,
        tolerance_rule="empirical <= bound + 3 SE (one-sided, bound is conservative)",
    )


def verify_q_bound(
    g_abs: float, alpha: float, d_b: int, samples: int, seed: int = 0
) -> McReport:
    """Empirical Gaussian sign-flip rate vs. the Gauss-inequality bound."""
    if alpha <= 0:
        raise UsageError("alpha must be positive")
    bound = theory.q_bound(g_abs, alpha, d_b)
    rng = derive(seed, TAG_MC, 3, d_b)
    noisy = g_abs + rng.normal(0.0, alpha / np.sqrt(d_b), size=samples)
    rate = float((noisy < 0.0).mean()) if g_abs > 0 else float((noisy < 0.0).mean())
    se = _binomial_se(rate, samples)
    return McReport(
        name=f"q_bound[g={g_abs},alpha={alpha},d_b={d_b}]",
        samples=samples,
        empirical=rate,
        theoretical=bound,
        standard_error=se,
        passed=rate <= bound + 3.0 * se,
        tolerance_rule="empirical <= bound + 3 SE (one-sided)",
    )


def verify_corollary1(
    M: int,
    q_i: float,
    params: ch.ChannelParams,
    samples: int,
    p_avg: float = 1.0,
    seed: int = 0,
) -> McReport:
    """Conditional flip rate given a realized strict +1 majority must be < 1/2."""
    if not (0.0 <= q_i < 0.5):
        raise UsageError("q_i must be below 1/2")
    rng = derive(seed, TAG_MC, 4, M)
    flips, n_plus = _simulate_flips(M, q_i, params, samples, p_avg, rng)
    majority = n_plus > M / 2
    n_cond = int(majority.sum())
    if n_cond == 0:
        raise UsageError("no samples realized a strict majority; increase samples")
    rate = float(flips[majority].mean())
    se = _binomial_se(rate, n_cond)
    return McReport(
        name=f"corollary1[M={M},q={q_i}]",
        samples=n_cond,
        empirical=rate,
        theoretical=0.5,
        standard_error=se,
        passed=rate < 0.5,
        tolerance_rule="conditional flip rate < 1/2 given realized strict majority",
    )


DEFAULT_XI_GRID = (0.5, 1.0, 5.0, 20.0)
DEFAULT_M_GRID = (4, 10, 50)
DEFAULT_Q_GRID = (0.05, 0.2, 0.4)


def run_default_suite(samples: int = 100_000, seed: int = 0) -> list[McReport]:
    """Full verification sweep used by the `verify` CLI subcommand."""
    reports: list[McReport] = []

    params = unit_channel(xi_snr=1.0)
    reports += verify_energy_means(params, m_plus=5, m_minus=5,
                                   samples=max(samples, 10_000), seed=seed)

    for xi in DEFAULT_XI_GRID:
        p = unit_channel(xi_snr=xi)
        for M in DEFAULT_M_GRID:
            for q in DEFAULT_Q_GRID:
                reports.append(verify_error_bound(M, q, p, samples, seed=seed))

    for ratio in (0.0, 0.5, 1.0, 2.0 / np.sqrt(3.0), 2.0, 3.0):
        reports.append(
            verify_q_bound(g_abs=ratio, alpha=1.0, d_b=1, samples=samples, seed=seed)
        )

    for M, q in ((11, 0.1), (101, 0.4)):
        reports.append(verify_corollary1(M, q, params, samples, seed=seed))
    return reports
