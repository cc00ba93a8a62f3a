"""Per-example loss functions."""

import numpy as np
from scipy.special import expit


class SquareLoss:
    """Squared error l(u, y) = (u - y)^2 / 2."""

    name = "square"

    def value(self, u, y):
        r = np.asarray(u, dtype=float) - np.asarray(y, dtype=float)
        return 0.5 * r * r

    def derivative(self, u, y):
        return np.asarray(u, dtype=float) - np.asarray(y, dtype=float)


class LogisticLoss:
    """Logistic loss l(u, y) = log(1 + exp(-y u)) for labels y in {-1, +1}.

    Evaluated through log1p/logaddexp so that margins of any magnitude
    (|yu| well beyond 700) neither overflow nor lose the tail.
    """

    name = "logistic"

    @staticmethod
    def _check_labels(y):
        y = np.asarray(y, dtype=float)
        if not np.all(np.abs(y) == 1.0):
            raise ValueError("logistic loss requires labels in {-1, +1}")
        return y

    def value(self, u, y):
        y = self._check_labels(y)
        return np.logaddexp(0.0, -y * np.asarray(u, dtype=float))

    def derivative(self, u, y):
        y = self._check_labels(y)
        return -y * expit(-y * np.asarray(u, dtype=float))


_LOSSES = {"square": SquareLoss, "logistic": LogisticLoss}


def get_loss(kind):
    """Return a loss instance from its name ('square' or 'logistic')."""
    if isinstance(kind, (SquareLoss, LogisticLoss)):
        return kind
    try:
        return _LOSSES[kind]()
    except KeyError:
        raise ValueError(
            f"unknown loss {kind!r}; expected one of {sorted(_LOSSES)}"
        ) from None
