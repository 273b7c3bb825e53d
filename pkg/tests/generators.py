"""Random valid models for property tests."""

import numpy as np
from scipy.stats import ortho_group

from timescale_lift.matfun import expm, noise_gramian
from timescale_lift.model import CtModel, DtModel, validate_ct, validate_dt


def random_stable_matrix(rng, n, re=(-2.5, -0.2), im=(0.2, 2.5), cond=4.0):
    """Real matrix with eigenvalues in the given box and a well-conditioned eigenbasis."""
    blocks = np.zeros((n, n))
    i = 0
    while i < n:
        a = rng.uniform(*re)
        if i + 1 < n and rng.random() < 0.5:
            b = rng.uniform(*im)
            blocks[i:i + 2, i:i + 2] = [[a, b], [-b, a]]
            i += 2
        else:
            blocks[i, i] = a
            i += 1
    if n == 1:
        return blocks
    U = ortho_group.rvs(n, random_state=rng)
    V = ortho_group.rvs(n, random_state=rng)
    T = U @ np.diag(np.exp(rng.uniform(0, np.log(cond), n))) @ V
    return T @ blocks @ np.linalg.inv(T)


GRAMIAN_COND_LIMIT = 1e10


def random_ct(rng, n=None, m=None, p=None, max_n=6, max_p=8, h_min=0.1, max_tries=500):
    """Valid continuous model whose one-period noise Gramian at ``h_min`` is
    numerically nonsingular (condition number below 1e10)."""
    for _ in range(max_tries):
        nn = n or int(rng.integers(1, max_n + 1))
        mm = m or int(rng.integers(1, nn + 1))
        pp = p or int(rng.integers(mm, max_p + 1))
        model = CtModel(
            random_stable_matrix(rng, nn),
            rng.standard_normal((nn, mm)),
            rng.standard_normal((pp, nn)),
        )
        if validate_ct(model):
            continue
        q = np.linalg.eigvalsh(noise_gramian(model.F, model.G, h_min))
        if q[0] > q[-1] / GRAMIAN_COND_LIMIT:
            return model
    raise RuntimeError(f"no valid model found for n={n}, m={m}, p={p}")


def random_fine_dt(rng, n=None, m=None, p=None, with_J=False, max_n=5, max_p=6, delta=0.2):
    """Fine discrete model ``F = expm(Fc * delta)``.

    Eigenvalue arguments stay below ``2.5 * delta = 0.5 < pi / 5`` so the
    principal q-th root of ``F^q`` returns ``F`` for ``q <= 5``.
    """
    while True:
        nn = n or int(rng.integers(1, max_n + 1))
        mm = m or int(rng.integers(1, nn + 1))
        pp = p or int(rng.integers(1, max_p + 1))
        F = expm(random_stable_matrix(rng, nn), delta)
        G = rng.standard_normal((nn, mm))
        H = rng.standard_normal((pp, nn))
        J = rng.standard_normal((pp, mm)) if with_J else None
        model = DtModel.fine(F, G, H, J, step=delta)
        if not validate_dt(model):
            return model
