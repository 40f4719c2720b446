"""Independent numerical oracles used by the tests."""

import numpy as np
import torch


def central_difference(f, x: torch.Tensor, index, eps: float = 1e-5) -> float:
    """d f / d x[index] by central differences; ``x`` is perturbed in place and restored."""
    with torch.no_grad():
        orig = x[index].item()
        x[index] = orig + eps
        up = float(f())
        x[index] = orig - eps
        down = float(f())
        x[index] = orig
    return (up - down) / (2 * eps)


def relative_error(analytic, numeric, floor: float = 1e-6) -> float:
    """``||a - n|| / max(||a||, ||n||, floor)``; the floor covers gradients that vanish exactly."""
    a = np.asarray(analytic, dtype=np.float64).ravel()
    n = np.asarray(numeric, dtype=np.float64).ravel()
    return float(np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), floor))


def sample_indices(shape, k: int, rng: np.random.Generator):
    """Up to ``k`` distinct multi-indices into a tensor of ``shape``."""
    size = int(np.prod(shape)) if len(shape) else 1
    flat = rng.choice(size, size=min(k, size), replace=False)
    return [tuple(int(i) for i in np.unravel_index(f, shape)) if len(shape) else () for f in flat]


def check_gradients(loss_fn, tensors: dict, rng: np.random.Generator, per_tensor: int = 8,
                    eps: float = 1e-5) -> dict:
    """Relative error between autograd and central differences for each named tensor.

    ``loss_fn`` must rebuild the scalar loss from the current tensor values.
    The error floor scales with ``|loss|`` and with the largest gradient
    entry, since the round-off of a central difference does; a tensor whose
    gradient is negligible next to the rest (or exactly zero) is judged
    against that noise level instead of against itself.
    """
    for t in tensors.values():
        t.grad = None
    loss = loss_fn()
    loss.backward()
    scale = max((float(t.grad.abs().max()) for t in tensors.values() if t.grad is not None), default=0.0)
    floor = 1e-6 * max(1.0, abs(loss.item()), scale)
    errors = {}
    for name, t in tensors.items():
        idx = sample_indices(tuple(t.shape), per_tensor, rng)
        analytic = [t.grad[i].item() if t.grad is not None else 0.0 for i in idx]
        numeric = [central_difference(loss_fn, t.data, i, eps) for i in idx]
        errors[name] = relative_error(analytic, numeric, floor)
    return errors


def textbook_variance(values) -> float:
    """Two-pass population variance."""
    values = [float(v) for v in values]
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values) / len(values)
