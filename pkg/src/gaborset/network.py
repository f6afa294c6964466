"""Feed-forward net (tanh/tanh) trained by scaled conjugate gradient.

The performance measure is gamma * MSE + (1 - gamma) * mean(p^2) over every
weight AND bias, so its gradient at gamma = 0 is exactly 2p/n. Parameters
flatten in a fixed order: w1 row-major, b1, w2 row-major, b2; the model file
and the SCG workspace both use it.

The SCG loop estimates curvature from gradient differencing with step
sigma0/|p|, scales it with a Levenberg-style lambda, and accepts a step only
when the comparison parameter Delta > 0, so the performance history never
increases. Direction restarts to steepest descent every n-parameters
accepted steps. No line search anywhere.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidTrainingSet, ShapeError

LAMBDA_OVERFLOW = 1.0e15


@dataclass(frozen=True)
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    seed: int = 0

    def __post_init__(self):
        h, i = self.w1.shape
        n = self.w2.shape[0]
        if self.b1.shape != (h,) or self.w2.shape != (n, h) or self.b2.shape != (n,):
            raise ShapeError("inconsistent layer shapes")
        for a in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(a)):
                raise ShapeError("model parameters must be finite")

    @property
    def n_inputs(self):
        return self.w1.shape[1]

    @property
    def n_hidden(self):
        return self.w1.shape[0]

    @property
    def n_outputs(self):
        return self.w2.shape[0]

    @property
    def n_params(self):
        return self.w1.size + self.b1.size + self.w2.size + self.b2.size


def flatten_params(m: MlpModel) -> np.ndarray:
    return np.concatenate(
        [m.w1.ravel(), m.b1.ravel(), m.w2.ravel(), m.b2.ravel()]
    )


def unflatten_params(flat, n_inputs, n_hidden, n_outputs, seed=0) -> MlpModel:
    flat = np.asarray(flat, dtype=np.float64)
    sizes = (n_hidden * n_inputs, n_hidden, n_outputs * n_hidden, n_outputs)
    if flat.shape != (sum(sizes),):
        raise ShapeError("flat parameter vector has wrong length")
    o = 0
    parts = []
    for s in sizes:
        parts.append(flat[o : o + s].copy())
        o += s
    return MlpModel(
        w1=parts[0].reshape(n_hidden, n_inputs),
        b1=parts[1],
        w2=parts[2].reshape(n_outputs, n_hidden),
        b2=parts[3],
        seed=seed,
    )


def init_model(n_inputs, n_hidden, n_outputs, seed) -> MlpModel:
    """Uniform [-0.5, 0.5] init: one flat draw, split in parameter order."""
    n = n_hidden * n_inputs + n_hidden + n_outputs * n_hidden + n_outputs
    rng = np.random.default_rng(seed)
    flat = rng.uniform(-0.5, 0.5, n)
    return unflatten_params(flat, n_inputs, n_hidden, n_outputs, seed=seed)


@dataclass(frozen=True)
class TrainingSet:
    """Rows of `patterns` are feature vectors; `targets` rows hold +/-1."""

    patterns: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.patterns)
        t = np.asarray(self.targets)
        if p.ndim != 2 or t.ndim != 2:
            raise InvalidTrainingSet("patterns and targets must be 2-D")
        if p.shape[0] != t.shape[0]:
            raise InvalidTrainingSet("pattern/target count mismatch")
        if p.shape[0] == 0:
            raise InvalidTrainingSet("empty training set")
        if not np.all(np.isfinite(p)):
            raise InvalidTrainingSet("patterns must be finite")
        if not np.all(np.isin(t, (-1.0, 1.0))):
            raise InvalidTrainingSet("targets must be +1 or -1")
        if p.shape[0] > 1 and np.all(t == t[0]):
            raise InvalidTrainingSet("all targets identical; nothing to separate")

    @property
    def n_patterns(self):
        return self.patterns.shape[0]

    @property
    def n_outputs(self):
        return self.targets.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 25
    reg_gamma: float = 0.9
    max_epochs: int = 300
    mse_goal: float = 3.0e-4
    grad_goal: float = 1.0e-6
    seed: int = 0
    sigma0: float = 1.0e-5
    lambda0: float = 1.0e-7

    def __post_init__(self):
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")
        if not 0.0 <= self.reg_gamma <= 1.0:
            raise ValueError("reg_gamma must lie in [0, 1]")
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be >= 0")
        if self.mse_goal <= 0 or self.grad_goal <= 0:
            raise ValueError("goals must be positive")
        if self.sigma0 <= 0 or self.lambda0 <= 0:
            raise ValueError("scg constants must be positive")


@dataclass
class TrainReport:
    epochs_run: int
    final_perf: float
    final_grad_norm: float
    stop_reason: str
    perf_history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "epochs_run": self.epochs_run,
            "final_perf": self.final_perf,
            "final_grad_norm": self.final_grad_norm,
            "stop_reason": self.stop_reason,
            "perf_history": list(self.perf_history),
        }


def forward(m: MlpModel, x) -> np.ndarray:
    """tanh(w2 . tanh(w1 . x + b1) + b2) for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.n_inputs,):
        raise ShapeError(f"expected input of length {m.n_inputs}, got {x.shape}")
    return np.tanh(m.w2 @ np.tanh(m.w1 @ x + m.b1) + m.b2)


def forward_batch(m: MlpModel, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != m.n_inputs:
        raise ShapeError("batch shape mismatch")
    return np.tanh(np.tanh(xs @ m.w1.T + m.b1) @ m.w2.T + m.b2)


def perf(m: MlpModel, tset: TrainingSet, gamma: float) -> float:
    """gamma * MSE + (1 - gamma) * mean of squared parameters (biases included)."""
    y = forward_batch(m, tset.patterns)
    mse = np.mean((tset.targets - y) ** 2)
    flat = flatten_params(m)
    return float(gamma * mse + (1.0 - gamma) * np.mean(flat**2))


def gradient(m: MlpModel, tset: TrainingSet, gamma: float) -> np.ndarray:
    """d perf / d params, flattened in the documented order."""
    xs = np.asarray(tset.patterns, dtype=np.float64)
    ts = np.asarray(tset.targets, dtype=np.float64)
    n_el = ts.size

    a1 = np.tanh(xs @ m.w1.T + m.b1)
    y = np.tanh(a1 @ m.w2.T + m.b2)

    # dMSE/dy = 2(y - t)/n_el, chained through both tanh derivatives
    dz2 = (2.0 / n_el) * (y - ts) * (1.0 - y**2)
    gw2 = dz2.T @ a1
    gb2 = dz2.sum(axis=0)
    dz1 = (dz2 @ m.w2) * (1.0 - a1**2)
    gw1 = dz1.T @ xs
    gb1 = dz1.sum(axis=0)

    g_mse = np.concatenate([gw1.ravel(), gb1, gw2.ravel(), gb2])
    flat = flatten_params(m)
    return gamma * g_mse + (1.0 - gamma) * (2.0 / flat.size) * flat


def scg_train(tset: TrainingSet, cfg: TrainConfig) -> tuple:
    """Full-batch SCG training from a seeded uniform init.

    Stop reasons, checked in this order: 'epochs' (budget exhausted,
    including max_epochs = 0), 'mse_goal' (perf <= mse_goal), 'grad_goal'
    (gradient norm <= grad_goal), 'lambda_overflow' (lambda > 1e15).
    """
    n_in = tset.patterns.shape[1]
    n_out = tset.n_outputs
    model = init_model(n_in, cfg.hidden, n_out, cfg.seed)
    shape = (n_in, cfg.hidden, n_out)

    def perf_at(wvec):
        return perf(unflatten_params(wvec, *shape, seed=cfg.seed), tset, cfg.reg_gamma)

    def grad_at(wvec):
        return gradient(
            unflatten_params(wvec, *shape, seed=cfg.seed), tset, cfg.reg_gamma
        )

    w = flatten_params(model)
    nparams = w.size
    e_cur = perf_at(w)
    g = grad_at(w)
    r = -g
    p = r.copy()
    gnorm = float(np.linalg.norm(g))
    history = [e_cur]

    def finish(epochs_run, reason):
        final = unflatten_params(w, *shape, seed=cfg.seed)
        report = TrainReport(
            epochs_run=epochs_run,
            final_perf=float(e_cur),
            final_grad_norm=gnorm,
            stop_reason=reason,
            perf_history=history,
        )
        return final, report

    if cfg.max_epochs == 0:
        return finish(0, "epochs")
    if e_cur <= cfg.mse_goal:
        return finish(0, "mse_goal")
    if gnorm <= cfg.grad_goal:
        return finish(0, "grad_goal")

    lam = cfg.lambda0
    lam_bar = 0.0
    success = True
    delta = 0.0
    accepted = 0

    for epoch in range(1, cfg.max_epochs + 1):
        pnorm2 = float(p @ p)
        if pnorm2 == 0.0:
            return finish(epoch - 1, "grad_goal")
        if success:
            sigma = cfg.sigma0 / np.sqrt(pnorm2)
            g_plus = grad_at(w + sigma * p)
            delta = float(p @ (g_plus - g)) / sigma
        delta += (lam - lam_bar) * pnorm2
        if delta <= 0.0:
            lam_bar = 2.0 * (lam - delta / pnorm2)
            delta = -delta + lam * pnorm2
            lam = lam_bar
        mu = float(p @ r)
        if mu <= 0.0 or delta <= 0.0 or not np.isfinite(delta):
            # conjugacy lost; fall back to steepest descent next epoch
            p = r.copy()
            success = True
            lam_bar = 0.0
            lam = max(lam, cfg.lambda0)
            history.append(e_cur)
            continue
        alpha = mu / delta
        e_new = perf_at(w + alpha * p)
        if np.isfinite(e_new):
            comp = 2.0 * delta * (e_cur - e_new) / mu**2
        else:
            comp = -1.0  # wild overshoot: force rejection and a lambda raise
        if comp > 0.0 and np.all(np.isfinite(w + alpha * p)):
            w = w + alpha * p
            e_cur = e_new
            g_new = grad_at(w)
            r_new = -g_new
            lam_bar = 0.0
            success = True
            accepted += 1
            if accepted % nparams == 0:
                p = r_new.copy()
            else:
                beta = float(r_new @ r_new - r_new @ r) / mu
                p = r_new + beta * p
            g = g_new
            r = r_new
            gnorm = float(np.linalg.norm(g))
            if comp >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if comp < 0.25:
            lam += delta * (1.0 - comp) / pnorm2
        history.append(e_cur)
        if e_cur <= cfg.mse_goal:
            return finish(epoch, "mse_goal")
        if gnorm <= cfg.grad_goal:
            return finish(epoch, "grad_goal")
        if lam > LAMBDA_OVERFLOW:
            return finish(epoch, "lambda_overflow")
    return finish(cfg.max_epochs, "epochs")


def save_model(path, m: MlpModel, report: TrainReport = None):
    """Write the model JSON: layer sizes, seed, row-major parameter arrays."""
    doc = {
        "input": m.n_inputs,
        "hidden": m.n_hidden,
        "outputs": m.n_outputs,
        "activation": "tanh",
        "seed": int(m.seed),
        "w1": m.w1.ravel().tolist(),
        "b1": m.b1.tolist(),
        "w2": m.w2.ravel().tolist(),
        "b2": m.b2.tolist(),
    }
    if report is not None:
        doc["train_report"] = report.to_dict()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(doc, indent=1))


def load_model(path) -> MlpModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("activation", "tanh") != "tanh":
        raise ShapeError(f"unsupported activation: {doc.get('activation')}")
    i, h, n = int(doc["input"]), int(doc["hidden"]), int(doc["outputs"])
    return MlpModel(
        w1=np.asarray(doc["w1"], dtype=np.float64).reshape(h, i),
        b1=np.asarray(doc["b1"], dtype=np.float64),
        w2=np.asarray(doc["w2"], dtype=np.float64).reshape(n, h),
        b2=np.asarray(doc["b2"], dtype=np.float64),
        seed=int(doc.get("seed", 0)),
    )
