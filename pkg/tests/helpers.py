"""Shared instance generators for the test suite."""

import numpy as np


def random_channel(rng, n_in=2, n_out=2, floor=0.02):
    w = rng.dirichlet(np.ones(n_out), size=n_in)
    w = np.maximum(w, floor)
    return w / w.sum(axis=1, keepdims=True)


def random_pux(rng, nu=2, nx=2, floor=0.02):
    p = np.maximum(rng.dirichlet(np.ones(nu * nx)), floor)
    return (p / p.sum()).reshape(nu, nx)


def random_instance(rng):
    """Random 2x2x2 problem: (P_UX, W_Y, lambda, R1, R2)."""
    return random_pux(rng), random_channel(rng), float(rng.choice([1.0, 2.0, 4.0])), *rng.uniform(0, 1.5, 2)
