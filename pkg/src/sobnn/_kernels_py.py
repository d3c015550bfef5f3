"""Pure-python (numpy) compute backend.

Jets are held as truncated Taylor coefficient lanes: an array of shape
(m+1, width, npts) whose lane j is the j-th Taylor coefficient (derivative
over j factorial) of every unit at every point.  The affine step acts on
each lane; the activation step composes the truncated series with the
activation's own Taylor expansion at the lane-0 value.  Lane 0 therefore
traverses exactly the arithmetic of a plain forward pass, so order-0 jets
equal realized values bit for bit.

All contractions go through einsum or explicit loops over the tiny jet
indices, never BLAS, so results do not depend on the host's thread count.
"""

from __future__ import annotations

import math

import numpy as np

from .activations import eval_jet_plan

BACKEND_NAME = "python"


def _act_jets(plan, z0: np.ndarray, order: int) -> np.ndarray:
    kind, a, table = plan
    return eval_jet_plan(kind, a, table, z0, order)


def _compose(plan, Z: np.ndarray, m: int) -> np.ndarray:
    """Activation applied to pre-activation jets Z of shape (m+1, w, n)."""
    D = _act_jets(plan, Z[0], m)
    if m == 0:
        return D[:1].copy()
    # Horner on the truncated series: run from the top coefficient down,
    # multiplying by S = Z - Z[0] (which has no constant term) each step.
    W = np.zeros_like(Z)
    W[0] = D[m] / math.factorial(m)
    for l in range(m - 1, -1, -1):
        Wn = np.zeros_like(Z)
        for j in range(m, 0, -1):
            acc = W[0] * Z[j]
            for i in range(1, j):
                acc += W[i] * Z[j - i]
            Wn[j] = acc
        Wn[0] = D[l] / math.factorial(l)
        W = Wn
    return W


def jet_forward(layers, plan, X: np.ndarray, v: np.ndarray, m: int) -> np.ndarray:
    """Taylor lanes (m+1, out_width, npts) of the realization along ``v``."""
    depth = len(layers)
    n = X.shape[1]
    Y = np.zeros((m + 1, X.shape[0], n))
    Y[0] = X
    if m >= 1:
        Y[1] = np.asarray(v, dtype=np.float64)[:, None]
    for idx, (A, b) in enumerate(layers):
        Z = np.einsum("uw,jwn->jun", A, Y)
        Z[0] += b[:, None]
        Y = _compose(plan, Z, m) if idx < depth - 1 else Z
    return Y


def _compose_with_tape(plan, Z: np.ndarray, m: int):
    """Forward composition that also returns what the backward pass needs."""
    D = _act_jets(plan, Z[0], m + 1)
    # Truncated powers of S = Z - Z[0]*e0; spow[l] has shape (m+1, w, n).
    spow = [np.zeros_like(Z) for _ in range(m + 1)]
    spow[0][0] = 1.0
    for l in range(1, m + 1):
        prev = spow[l - 1]
        cur = spow[l]
        for j in range(1, m + 1):
            acc = None
            for i in range(l - 1, j):  # prev[i] vanishes below degree l-1
                term = prev[i] * Z[j - i]
                acc = term if acc is None else acc + term
            if acc is not None:
                cur[j] = acc
    W = np.zeros_like(Z)
    for l in range(m + 1):
        c = 1.0 / math.factorial(l)
        for j in range(m + 1):
            W[j] += (D[l] * c) * spow[l][j]
    return W, (D, spow)


def _compose_vjp(plan, Z: np.ndarray, tape, Wbar: np.ndarray, m: int) -> np.ndarray:
    D, spow = tape
    Zbar = np.zeros_like(Z)
    for l in range(m + 1):
        inv = 1.0 / math.factorial(l)
        dot = np.zeros_like(Z[0])
        for j in range(m + 1):
            dot += Wbar[j] * spow[l][j]
        Zbar[0] += (D[l + 1] * inv) * dot
        if l >= 1:
            for i in range(1, m + 1):
                acc = None
                for j in range(i, m + 1):
                    term = Wbar[j] * spow[l - 1][j - i]
                    acc = term if acc is None else acc + term
                if acc is not None:
                    Zbar[i] += (D[l] * (l * inv)) * acc
    return Zbar


def jet_vjp(layers, plan, X: np.ndarray, v: np.ndarray, m: int, cot: np.ndarray) -> np.ndarray:
    """Gradient of sum_pts sum_j cot[j, pt] * lane_j(pt) in the parameters.

    Scalar-output networks only; the returned vector is laid out like
    flattened parameters (A_1 row-major, b_1, A_2, b_2, ...).  Memory scales
    with depth * width * npts, sized for training batches.
    """
    depth = len(layers)
    n = X.shape[1]
    Y = np.zeros((m + 1, X.shape[0], n))
    Y[0] = X
    if m >= 1:
        Y[1] = np.asarray(v, dtype=np.float64)[:, None]
    inputs, tapes, pre = [], [], []
    for idx, (A, b) in enumerate(layers):
        inputs.append(Y)
        Z = np.einsum("uw,jwn->jun", A, Y)
        Z[0] += b[:, None]
        if idx < depth - 1:
            pre.append(Z)
            Y, tape = _compose_with_tape(plan, Z, m)
            tapes.append(tape)
        else:
            Y = Z
    if Y.shape[1] != 1:
        raise ValueError("jet_vjp requires a scalar-output network")
    Zbar = np.asarray(cot, dtype=np.float64).reshape(m + 1, 1, n)
    grads: list[np.ndarray] = []
    for idx in range(depth - 1, -1, -1):
        A, _ = layers[idx]
        gA = np.einsum("jun,jwn->uw", Zbar, inputs[idx])
        gb = Zbar[0].sum(axis=1)
        grads.append(np.concatenate([gA.ravel(), gb]))
        if idx == 0:
            break
        Ybar = np.einsum("uw,jun->jwn", A, Zbar)
        Zbar = _compose_vjp(plan, pre[idx - 1], tapes[idx - 1], Ybar, m)
    return np.concatenate(grads[::-1])


def cross_forward(layers, plan, X: np.ndarray, axis_i: int, axis_j: int) -> np.ndarray:
    """Nested first-order jet lanes (value, d_i, d_j, d_i d_j) per unit."""
    depth = len(layers)
    n = X.shape[1]
    Y = np.zeros((4, X.shape[0], n))
    Y[0] = X
    Y[1, axis_i] = 1.0
    Y[2, axis_j] = 1.0
    for idx, (A, b) in enumerate(layers):
        Z = np.einsum("uw,jwn->jun", A, Y)
        Z[0] += b[:, None]
        if idx < depth - 1:
            D = _act_jets(plan, Z[0], 2)
            Y = np.empty_like(Z)
            Y[0] = D[0]
            Y[1] = D[1] * Z[1]
            Y[2] = D[1] * Z[2]
            Y[3] = D[1] * Z[3] + D[2] * Z[1] * Z[2]
        else:
            Y = Z
    return Y


def cross_vjp(layers, plan, X: np.ndarray, axis_i: int, axis_j: int, cot: np.ndarray) -> np.ndarray:
    """Parameter gradient of the cross-derivative lanes (scalar output)."""
    depth = len(layers)
    n = X.shape[1]
    Y = np.zeros((4, X.shape[0], n))
    Y[0] = X
    Y[1, axis_i] = 1.0
    Y[2, axis_j] = 1.0
    inputs, pre, tabs = [], [], []
    for idx, (A, b) in enumerate(layers):
        inputs.append(Y)
        Z = np.einsum("uw,jwn->jun", A, Y)
        Z[0] += b[:, None]
        if idx < depth - 1:
            D = _act_jets(plan, Z[0], 3)
            pre.append(Z)
            tabs.append(D)
            Y = np.empty_like(Z)
            Y[0] = D[0]
            Y[1] = D[1] * Z[1]
            Y[2] = D[1] * Z[2]
            Y[3] = D[1] * Z[3] + D[2] * Z[1] * Z[2]
        else:
            Y = Z
    if Y.shape[1] != 1:
        raise ValueError("cross_vjp requires a scalar-output network")
    Zbar = np.asarray(cot, dtype=np.float64).reshape(4, 1, n)
    grads: list[np.ndarray] = []
    for idx in range(depth - 1, -1, -1):
        A, _ = layers[idx]
        gA = np.einsum("jun,jwn->uw", Zbar, inputs[idx])
        gb = Zbar[0].sum(axis=1)
        grads.append(np.concatenate([gA.ravel(), gb]))
        if idx == 0:
            break
        Ybar = np.einsum("uw,jun->jwn", A, Zbar)
        Z, D = pre[idx - 1], tabs[idx - 1]
        Zbar = np.empty_like(Ybar)
        Zbar[0] = (
            D[1] * Ybar[0]
            + D[2] * Z[1] * Ybar[1]
            + D[2] * Z[2] * Ybar[2]
            + (D[2] * Z[3] + D[3] * Z[1] * Z[2]) * Ybar[3]
        )
        Zbar[1] = D[1] * Ybar[1] + D[2] * Z[2] * Ybar[3]
        Zbar[2] = D[1] * Ybar[2] + D[2] * Z[1] * Ybar[3]
        Zbar[3] = D[1] * Ybar[3]
    return np.concatenate(grads[::-1])
