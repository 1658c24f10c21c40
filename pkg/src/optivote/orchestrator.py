"""End-to-end federated rounds under a chosen aggregation scheme.

Round structure: select active nodes, compute local mini-batch gradients,
sign-quantize, (for the adaptive scheme) refresh consistency scores
against the previous broadcast vote and update powers, transmit over the
PPM channel, detect the majority vote, step the global model, evaluate.
The downlink is error-free, so a single global model is stored.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import channel as ch
from . import learner, phy, power, theory
from .config import Config, config_hash
from .errors import UsageError
from .rng import TAG_CHANNEL, TAG_DATA, TAG_GRADIENT, TAG_NOISE, TAG_SELECT, derive


@dataclass(frozen=True)
class RoundMetrics:
    round: int
    train_loss: float
    test_accuracy: float
    mv_error_rate: float
    mean_power: float
    mean_consistency: float


@dataclass
class RunSummary:
    config_hash: str = ""
    seed: int = 0
    metrics: list[RoundMetrics] = field(default_factory=list)
    final_accuracy: float = 0.0
    wall_time: float = 0.0
    power_rows: list[tuple] = field(default_factory=list)  # (round, node, p, a)
    slot_rows: list[tuple] = field(default_factory=list)  # (round, coord, e+, e-, delta)
    final_w: np.ndarray | None = None


def select_active(M: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform sample of m distinct node ids."""
    if not (1 <= m <= M):
        raise UsageError("require 1 <= m <= M")
    return np.sort(rng.choice(M, size=m, replace=False))


def aggregate_fedavg_air(
    gradients: np.ndarray,
    powers: np.ndarray,
    intensities: np.ndarray,
    sigma_n2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uncompensated analog superposition: (1/m) sum P_m I_m g_m + noise.

    No CSI inversion is applied, so heterogeneous fading biases the mean.
    """
    gradients = np.asarray(gradients, dtype=float)
    if gradients.ndim != 2 or len(gradients) < 1:
        raise UsageError("gradients must be a nonempty (m, q) matrix")
    m, q = gradients.shape
    weights = np.asarray(powers, dtype=float) * np.asarray(intensities, dtype=float)
    agg = (weights[:, None] * gradients).sum(axis=0) / m
    if sigma_n2 > 0:
        agg = agg + rng.normal(0.0, np.sqrt(sigma_n2), size=q)
    return agg


def _build_datasets(cfg: Config, seed: int) -> tuple[learner.Dataset, learner.Dataset]:
    ds = cfg.learner.dataset
    if ds.type == "synthetic":
        full = learner.make_synthetic(
            ds.num_classes, ds.n + ds.n_test, ds.d, ds.separation,
            seed=int(derive(seed, TAG_DATA).integers(2**31)),
        )
        train = learner.Dataset(full.features[: ds.n], full.labels[: ds.n],
                                full.num_classes, full.name)
        test = learner.Dataset(full.features[ds.n :], full.labels[ds.n :],
                               full.num_classes, full.name)
        return train, test
    train = learner.load_mnist_idx(ds.train_images, ds.train_labels)
    test = learner.load_mnist_idx(ds.test_images, ds.test_labels)
    return train, test


def run(cfg: Config) -> RunSummary:
    """Execute one configured training run; deterministic in (config, seed)."""
    t0 = time.monotonic()
    rc = cfg.run
    seed = rc.seed
    scheme = rc.scheme

    params = cfg.channel.to_params()
    # The fixed-power variant is the adaptive scheme with the step size
    # pinned to zero, so the two share one code path bit-for-bit.
    pparams = cfg.power.to_params()
    if scheme == "optivote_fixed_power":
        pparams = power.PowerParams(
            p_avg=pparams.p_avg, p_min=pparams.p_min, p_max=pparams.p_max,
            rho=0.0, abar_scope=pparams.abar_scope,
        )

    train, test = _build_datasets(cfg, seed)
    shards = learner.partition(
        train, rc.M, cfg.learner.partition.mode,
        seed=int(derive(seed, TAG_DATA, 1).integers(2**31)),
        labels_per_node=cfg.learner.partition.labels_per_node,
    )
    model = learner.Model.init(
        cfg.learner.model.arch, train.d, train.num_classes,
        hidden=cfg.learner.model.hidden,
        seed=int(derive(seed, TAG_DATA, 2).integers(2**31)),
    )

    eta = rc.eta
    if rc.lr == "theorem1":
        eta = theory.theorem1_eta(rc.L1_estimate, rc.d_b)

    pstate = power.PowerState.initial(rc.M, pparams)
    last_mv: np.ndarray | None = None
    summary = RunSummary(config_hash=config_hash(cfg), seed=seed)

    for n in range(rc.rounds):
        active = select_active(rc.M, rc.m, derive(seed, TAG_SELECT, n))

        grads = np.stack([
            learner.local_gradient(
                model, train, shards[node], rc.d_b,
                derive(seed, TAG_GRADIENT, n, node),
                local_steps=cfg.learner.local_steps, eta=eta,
            )
            for node in active
        ])
        signs = np.stack([learner.sign_quantize(g) for g in grads])
        ideal = phy.ideal_majority(signs)
        mv_error_rate = 0.0

        if scheme in ("optivote", "optivote_fixed_power"):
            if last_mv is not None:
                for row, node in enumerate(active):
                    pstate.a[node] = power.consistency_score(signs[row], last_mv)
                pstate = power.update_powers(pstate, pparams, active=active)
            intensities = np.array([
                ch.sample_channel(params, derive(seed, TAG_CHANNEL, n, node)).intensity
                for node in active
            ])
            e_plus, e_minus = phy.superpose_frame(
                signs, pstate.p[active], intensities, params.sigma_n2,
                derive(seed, TAG_NOISE, n),
            )
            mv = phy.detect_mv(e_plus, e_minus)
            mv_error_rate = float(np.mean(mv != ideal))
            model = learner.apply_mv_update(model, mv, eta)
            last_mv = mv
            if cfg.output.dump_slots:
                for i in range(model.q):
                    summary.slot_rows.append(
                        (n, i, e_plus[i], e_minus[i], e_plus[i] - e_minus[i])
                    )
        elif scheme == "ideal_mv":
            model = learner.apply_mv_update(model, ideal, eta)
            last_mv = ideal
        elif scheme == "fedavg_air":
            intensities = np.array([
                ch.sample_channel(params, derive(seed, TAG_CHANNEL, n, node)).intensity
                for node in active
            ])
            agg = aggregate_fedavg_air(
                grads, pstate.p[active], intensities, params.sigma_n2,
                derive(seed, TAG_NOISE, n),
            )
            model = learner.apply_gradient_update(model, agg, eta)
        else:
            raise UsageError(f"unknown scheme {scheme!r}")

        train_loss, _ = learner.evaluate(model, train)
        _, test_acc = learner.evaluate(model, test)
        summary.metrics.append(RoundMetrics(
            round=n,
            train_loss=train_loss,
            test_accuracy=test_acc,
            mv_error_rate=mv_error_rate,
            mean_power=float(pstate.p.mean()),
            mean_consistency=float(pstate.a.mean()),
        ))
        if cfg.output.dump_power:
            for node in range(rc.M):
                summary.power_rows.append((n, node, pstate.p[node], pstate.a[node]))

    if summary.metrics:
        summary.final_accuracy = summary.metrics[-1].test_accuracy
    summary.final_w = model.w.copy()
    summary.wall_time = time.monotonic() - t0
    return summary


METRICS_HEADER = "round,train_loss,test_accuracy,mv_error_rate,mean_power,mean_consistency"


def metrics_csv(summary: RunSummary) -> str:
    """Plot-ready CSV; formatting is fixed so replays are byte-identical."""
    lines = [METRICS_HEADER]
    for r in summary.metrics:
        lines.append(
            f"{r.round},{r.train_loss:.17g},{r.test_accuracy:.17g},"
            f"{r.mv_error_rate:.17g},{r.mean_power:.17g},{r.mean_consistency:.17g}"
        )
    return "\n".join(lines) + "\n"
