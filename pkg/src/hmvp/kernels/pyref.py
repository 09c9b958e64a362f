"""Pure-Python kernel backend.

Each function here has a compiled twin in `_core` (Cython). The two are kept
bitwise-identical: plain Python floats are IEEE doubles, both backends
evaluate the same formulas in the same order, and the extension is compiled
with floating-point contraction disabled. Tests assert the parity.

All kernels operate on C-contiguous float64 / int64 arrays and perform no
allocation beyond scratch scalars; outputs are written into caller-provided
arrays. None of them call LAPACK or numpy.linalg: the whole point of the
recursive solver is that every inversion is a closed-form 3x3 adjugate.

Entry conventions: `coupling[c][r][s]` is the covariance between corner r
and interior s of cluster c; `corners[c][r]` is the global junction index
of corner r; interior nodes of cluster c are implicit (3c, 3c+1, 3c+2 in
the interior segment).
"""

BACKEND_NAME = "python"


def invert_blocks(blocks, tol_factor, inverses, minors):
    """Invert m symmetric 3x3 blocks by adjugate/determinant.

    Writes the inverses into `inverses` (m,3,3) and the leading principal
    minors (1x1, 2x2, 3x3 determinants) into `minors` (m,3). Returns the
    index of the first block whose determinant magnitude is at most
    tol_factor * (max abs entry)**3, or -1 if all blocks pass. Blocks after
    a failing one are left unwritten.
    """
    m = blocks.shape[0]
    blk = blocks.tolist()
    inv_out = inverses
    min_out = minors
    for c in range(m):
        b = blk[c]
        a, bq, cq = b[0][0], b[0][1], b[0][2]
        d, e, f = b[1][0], b[1][1], b[1][2]
        g, h, i = b[2][0], b[2][1], b[2][2]
        ca = e * i - f * h
        cb = -(d * i - f * g)
        cc = d * h - e * g
        cd = -(bq * i - cq * h)
        ce = a * i - cq * g
        cf = -(a * h - bq * g)
        cg = bq * f - cq * e
        ch = -(a * f - cq * d)
        ci = a * e - bq * d
        det = a * ca + bq * cb + cq * cc
        scale = max(abs(a), abs(bq), abs(cq), abs(d), abs(e), abs(f),
                    abs(g), abs(h), abs(i))
        min_out[c, 0] = a
        min_out[c, 1] = ci
        min_out[c, 2] = det
        if abs(det) <= tol_factor * scale * scale * scale:
            return c
        invdet = 1.0 / det
        inv_out[c, 0, 0] = ca * invdet
        inv_out[c, 0, 1] = cd * invdet
        inv_out[c, 0, 2] = cg * invdet
        inv_out[c, 1, 0] = cb * invdet
        inv_out[c, 1, 1] = ce * invdet
        inv_out[c, 1, 2] = ch * invdet
        inv_out[c, 2, 0] = cc * invdet
        inv_out[c, 2, 1] = cf * invdet
        inv_out[c, 2, 2] = ci * invdet
    return -1


def schur_corrections(coupling, inverses, out):
    """Per cluster, the 3x3 corner-corner correction C @ Binv @ C^T.

    C is the cluster's coupling block (corner x interior) and Binv the
    cached interior inverse. `out` (m,3,3) receives the full symmetric
    correction; callers consume the upper triangle.
    """
    m = coupling.shape[0]
    cp = coupling.tolist()
    iv = inverses.tolist()
    for c in range(m):
        J = cp[c]
        V = iv[c]
        for r in range(3):
            jr0, jr1, jr2 = J[r][0], J[r][1], J[r][2]
            w0 = jr0 * V[0][0] + jr1 * V[1][0] + jr2 * V[2][0]
            w1 = jr0 * V[0][1] + jr1 * V[1][1] + jr2 * V[2][1]
            w2 = jr0 * V[0][2] + jr1 * V[1][2] + jr2 * V[2][2]
            for s in range(3):
                out[c, r, s] = w0 * J[s][0] + w1 * J[s][1] + w2 * J[s][2]
    return None


def reduce_rhs(y_jun, y_int, coupling, inverses, corners, out):
    """Collapse a level-k right-hand side onto the junction nodes.

    out = y_jun minus, for each cluster, the coupling block applied to
    Binv @ y_interior, accumulated at the cluster's corner indices in
    canonical cluster order.
    """
    nj = y_jun.shape[0]
    for idx in range(nj):
        out[idx] = y_jun[idx]
    m = coupling.shape[0]
    cp = coupling.tolist()
    iv = inverses.tolist()
    yi = y_int.tolist()
    cr = corners.tolist()
    for c in range(m):
        V = iv[c]
        y = yi[c]
        u0 = V[0][0] * y[0] + V[0][1] * y[1] + V[0][2] * y[2]
        u1 = V[1][0] * y[0] + V[1][1] * y[1] + V[1][2] * y[2]
        u2 = V[2][0] * y[0] + V[2][1] * y[1] + V[2][2] * y[2]
        J = cp[c]
        idx = cr[c]
        for r in range(3):
            out[idx[r]] -= J[r][0] * u0 + J[r][1] * u1 + J[r][2] * u2
    return None


def back_substitute(junction_values, y_int, coupling, inverses, corners, out):
    """Recover interior values from solved junction values.

    Per cluster: out_c = Binv @ (y_interior_c - C^T v|corners), the unique
    interior completion making the full vector solve the level-k system.
    """
    m = coupling.shape[0]
    cp = coupling.tolist()
    iv = inverses.tolist()
    yi = y_int.tolist()
    cr = corners.tolist()
    jv = junction_values.tolist()
    for c in range(m):
        idx = cr[c]
        v0, v1, v2 = jv[idx[0]], jv[idx[1]], jv[idx[2]]
        J = cp[c]
        y = yi[c]
        t0 = y[0] - (J[0][0] * v0 + J[1][0] * v1 + J[2][0] * v2)
        t1 = y[1] - (J[0][1] * v0 + J[1][1] * v1 + J[2][1] * v2)
        t2 = y[2] - (J[0][2] * v0 + J[1][2] * v1 + J[2][2] * v2)
        V = iv[c]
        out[c, 0] = V[0][0] * t0 + V[0][1] * t1 + V[0][2] * t2
        out[c, 1] = V[1][0] * t0 + V[1][1] * t1 + V[1][2] * t2
        out[c, 2] = V[2][0] * t0 + V[2][1] * t1 + V[2][2] * t2
    return None


def route_corrections(corners, corrections, next_junction_count,
                      next_corners, out_junction_diag, out_interior,
                      out_coupling, violation):
    """Subtract corner corrections into the block structure one level down.

    `corners` indexes clusters of the level being reduced; their corner
    nodes are the nodes of the next level down, where each index is either
    a junction (< next_junction_count) or interior slot of some next-level
    cluster. The caller preloads out_junction_diag / out_interior with the
    junction variances being corrected and zeros out_coupling.

    Returns 0 on success. Returns 1 and writes the offending pair into
    `violation` (2,) if a correction lands on a node pair the next level's
    pattern cannot hold (junction-junction, or interiors of two different
    clusters) - impossible for well-formed inputs.
    """
    m = corners.shape[0]
    cr = corners.tolist()
    ko = corrections.tolist()
    nj2 = next_junction_count
    nc = next_corners.tolist()
    for c in range(m):
        idx = cr[c]
        K = ko[c]
        for r in range(3):
            for s in range(r, 3):
                a = idx[r]
                b = idx[s]
                val = K[r][s]
                if a == b:
                    if a < nj2:
                        out_junction_diag[a] -= val
                    else:
                        b2 = (a - nj2) // 3
                        s2 = (a - nj2) % 3
                        out_interior[b2, s2, s2] -= val
                elif a < nj2 and b < nj2:
                    violation[0] = a
                    violation[1] = b
                    return 1
                elif a >= nj2 and b >= nj2:
                    b2 = (a - nj2) // 3
                    c2 = (b - nj2) // 3
                    if b2 != c2:
                        violation[0] = a
                        violation[1] = b
                        return 1
                    s2 = (a - nj2) % 3
                    t2 = (b - nj2) % 3
                    out_interior[b2, s2, t2] -= val
                    out_interior[b2, t2, s2] -= val
                else:
                    if a < nj2:
                        jun, inter = a, b
                    else:
                        jun, inter = b, a
                    b2 = (inter - nj2) // 3
                    s2 = (inter - nj2) % 3
                    r2 = -1
                    for t in range(3):
                        if nc[b2][t] == jun:
                            r2 = t
                            break
                    if r2 < 0:
                        violation[0] = a
                        violation[1] = b
                        return 1
                    out_coupling[b2, r2, s2] -= val
    return 0


def route_corrections_base(corners, corrections, out_dense):
    """Subtract corner corrections into the dense base 3x3 matrix.

    Used when the level below is 0: all corner indices are base nodes and
    every pair is admissible. The caller preloads out_dense with the
    diagonal of junction variances.
    """
    m = corners.shape[0]
    cr = corners.tolist()
    ko = corrections.tolist()
    for c in range(m):
        idx = cr[c]
        K = ko[c]
        for r in range(3):
            for s in range(r, 3):
                a = idx[r]
                b = idx[s]
                val = K[r][s]
                if a == b:
                    out_dense[a, a] -= val
                else:
                    out_dense[a, b] -= val
                    out_dense[b, a] -= val
    return 0
