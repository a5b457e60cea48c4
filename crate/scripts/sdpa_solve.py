#!/usr/bin/env python3
"""Solve an SDPA sparse problem (.dat-s) with a primal-dual interior-point method.

usage: sdpa_solve.py INPUT.dat-s OUTPUT

The SDPA dual `max F0.Y s.t. Fi.Y = ci, Y >= 0` is solved as

    min <C, X> + cf.f   s.t.   A(X) + G f = b,   X >= 0

with C = -F0, b = c, and X the block-diagonal Y. Diagonal entries that
`invset` marks as free-variable pairs are merged into free variables f.
Steps use the Nesterov-Todd direction with Mehrotra predictor-corrector; free
variables are eliminated with a null-space basis of G'. Set
SDPA_SOLVE_VERBOSE=1 for a per-iteration log on stderr.

The output follows SDPA's result layout (phase.value, objValPrimal,
objValDual, xVec, yMat).
"""
import os
import re
import sys

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

FREE_MARKER = "* invset free pairs:"
FEAS_TOL = 1e-7
GAP_TOL = 1e-6
STALL_ITERS = 15
MAX_ITER = 150
STEP_FRACTION = 0.95
REFINE_STEPS = 3
DEPENDENT_ROW_TOL = 1e-14
EQUILIBRATION_PASSES = 20


def numbers(line):
    return [float(t) for t in re.split(r"[\s,{}()]+", line.strip()) if t]


def read_sdpa(path):
    lines, free = [], 0
    with open(path) as fh:
        for raw in fh:
            s = raw.strip()
            if s.startswith(FREE_MARKER):
                free = int(s[len(FREE_MARKER):])
            if s and s[0] not in '*"':
                lines.append(s)
    m = int(numbers(lines[0])[0])
    nblocks = int(numbers(lines[1])[0])
    sizes = [int(v) for v in numbers(lines[2])[:nblocks]]
    c = np.array(numbers(lines[3])[:m])
    entries = [numbers(s) for s in lines[4:]]
    return m, sizes, c, entries, free


class Problem:
    """Equilibrated standard form with one LP block and dense PSD blocks."""

    def __init__(self, path):
        m, sizes, c, entries, free = read_sdpa(path)
        lp = -sizes[0] if sizes and sizes[0] < 0 else 0
        if lp == 0:
            free = 0
        self.m, self.sizes, self.lp, self.free = m, sizes, lp, free
        self.nlp = lp - 2 * free
        self.psd = [(b, k) for b, k in enumerate(sizes) if k > 0]

        g_rows, g_cols, g_vals = [], [], []
        l_rows, l_cols, l_vals = [], [], []
        cf = np.zeros(free)
        clp = np.zeros(self.nlp)
        trip = {b: ([], [], []) for b, _ in self.psd}
        cmat = {b: np.zeros((k, k)) for b, k in self.psd}
        for e in entries:
            mat, block, i, j, v = int(e[0]), int(e[1]) - 1, int(e[2]) - 1, int(e[3]) - 1, e[4]
            if sizes[block] < 0:
                if i != j:
                    continue
                if i < 2 * free:
                    if i % 2 == 1:
                        continue  # the negative half mirrors the positive one
                    if mat == 0:
                        cf[i // 2] = -v
                    else:
                        g_rows.append(mat - 1), g_cols.append(i // 2), g_vals.append(v)
                else:
                    p = i - 2 * free
                    if mat == 0:
                        clp[p] = -v
                    else:
                        l_rows.append(mat - 1), l_cols.append(p), l_vals.append(v)
                continue
            k = sizes[block]
            if mat == 0:
                cmat[block][i, j] = cmat[block][j, i] = -v
            else:
                rows, cols, vals = trip[block]
                for a, bb in {(i, j), (j, i)}:
                    rows.append(mat - 1), cols.append(a * k + bb), vals.append(v)

        G = sp.csr_matrix((g_vals, (g_rows, g_cols)), shape=(m, free))
        Alp = sp.csr_matrix((l_vals, (l_rows, l_cols)), shape=(m, self.nlp))
        Apsd = {
            b: sp.csr_matrix((vals, (rows, cols)), shape=(m, k * k))
            for (b, k), (rows, cols, vals) in ((bk, trip[bk[0]]) for bk in self.psd)
        }

        # Ruiz equilibration. Rows, free and LP columns are scaled directly;
        # PSD blocks by a diagonal congruence X = D X~ D, which keeps the cone.
        r, g, e = np.ones(m), np.ones(free), np.ones(self.nlp)
        d = {b: np.ones(k) for b, k in self.psd}

        def scaled():
            R = sp.diags(r)
            return (
                R @ G @ sp.diags(g),
                R @ Alp @ sp.diags(e),
                {b: R @ A @ sp.diags(np.outer(d[b], d[b]).ravel()) for b, A in Apsd.items()},
            )

        def absmax(A, axis):
            if 0 in A.shape:
                return np.ones(A.shape[1 - axis])
            out = np.asarray(abs(A).max(axis=axis).todense()).ravel()
            out[out == 0] = 1.0
            return out

        for _ in range(EQUILIBRATION_PASSES):
            Gs, Ls, Ps = scaled()
            rows = np.maximum.reduce(
                [absmax(Gs, 1), absmax(Ls, 1)] + [absmax(A, 1) for A in Ps.values()]
            )
            if free:
                g /= np.sqrt(absmax(Gs, 0))
            if self.nlp:
                e /= np.sqrt(absmax(Ls, 0))
            for b, k in self.psd:
                d[b] /= np.sqrt(absmax(Ps[b], 0).reshape(k, k).max(axis=1))
            r /= np.sqrt(rows)

        # then unit rows
        Gs, Ls, Ps = scaled()
        sq = np.asarray(Gs.multiply(Gs).sum(axis=1)).ravel()
        sq += np.asarray(Ls.multiply(Ls).sum(axis=1)).ravel()
        for A in Ps.values():
            sq += np.asarray(A.multiply(A).sum(axis=1)).ravel()
        norms = np.sqrt(sq)
        norms[norms == 0] = 1.0
        r /= norms
        Gs, Ls, Ps = scaled()
        self.row_scale, self.free_scale, self.lp_scale, self.psd_scale = r, g, e, d
        self.G = Gs.toarray()
        self.Alp = Ls.tocsr()
        self.Apsd = {b: A.tocsr() for b, A in Ps.items()}
        self.b = c * r
        self.cf, self.clp = cf * g, clp * e
        self.C = {b: cmat[b] * np.outer(d[b], d[b]) for b, _ in self.psd}
        self.drop_dependent_rows()
        m = self.m

        # per-constraint entries of each PSD block for the Schur complement
        self.touch = {}
        for b, k in self.psd:
            A = self.Apsd[b].tocsr()
            per = []
            for i in range(m):
                lo, hi = A.indptr[i], A.indptr[i + 1]
                if lo == hi:
                    continue
                idx = A.indices[lo:hi]
                per.append((i, idx // k, idx % k, A.data[lo:hi]))
            self.touch[b] = per

    def drop_dependent_rows(self):
        """Keeps a maximal independent set of rows, chosen by pivoted QR of A A'."""
        gram = self.G @ self.G.T + (self.Alp @ self.Alp.T).toarray()
        for A in self.Apsd.values():
            gram += (A @ A.T).toarray()
        _, r, piv = sla.qr(gram, pivoting=True, mode="economic")
        d = np.abs(np.diag(r))
        rank = int(np.sum(d > DEPENDENT_ROW_TOL * d[0])) if d.size else 0
        self.keep = np.sort(piv[:rank])
        if rank == self.m:
            return
        self.m = rank
        self.G = self.G[self.keep]
        self.Alp = self.Alp[self.keep]
        self.Apsd = {b: A[self.keep] for b, A in self.Apsd.items()}
        self.b = self.b[self.keep]

    def op(self, X, f, x):
        """A(X) + G f."""
        r = self.G @ f + self.Alp @ x
        for b, k in self.psd:
            r += self.Apsd[b] @ X[b].ravel()
        return r

    def adj(self, y):
        """PSD, LP and free parts of the adjoint applied to y."""
        mats = {b: (self.Apsd[b].T @ y).reshape(k, k) for b, k in self.psd}
        return mats, self.Alp.T @ y, self.G.T @ y

    def schur(self, W, x, s):
        """M_ij = <A_i, W A_j W> over the PSD blocks plus the LP part."""
        M = (self.Alp.multiply(x / s) @ self.Alp.T).toarray() if self.nlp else np.zeros((self.m, self.m))
        for b, k in self.psd:
            A = self.Apsd[b]
            Wb = W[b]
            per = self.touch[b]
            if not per:
                continue
            cols = np.empty((k * k, len(per)))
            for t, (_, rows, cs, vals) in enumerate(per):
                # W A_i W from the entries of A_i
                cols[:, t] = (Wb[:, rows] @ (vals[:, None] * Wb[cs, :])).ravel()
            idx = [i for i, *_ in per]
            M[:, idx] += A @ cols
        return (M + M.T) / 2


def max_step(L, d):
    """Largest step a with X + a dX PSD, given X = L L'."""
    W = sla.solve_triangular(L, d, lower=True)
    W = sla.solve_triangular(L, W.T, lower=True)
    lam = np.linalg.eigvalsh((W + W.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def lp_step(v, dv):
    neg = dv < 0
    return np.min(-v[neg] / dv[neg]) if np.any(neg) else np.inf


def sym(a):
    return (a + a.T) / 2


def solve(path):
    P = Problem(path)
    verbose = os.environ.get("SDPA_SOLVE_VERBOSE") == "1"
    m, nf = P.m, P.free
    dims = sum(k for _, k in P.psd) + P.nlp
    normb = 1.0 + np.linalg.norm(P.b)
    normc = 1.0 + np.sqrt(
        sum(np.sum(P.C[b] ** 2) for b, _ in P.psd) + P.clp @ P.clp + P.cf @ P.cf
    )

    # initial point in the spirit of SDPT3's infeaspt
    xi = max(10.0, np.sqrt(dims), dims * np.max((1 + np.abs(P.b))))
    eta = max(10.0, np.sqrt(dims), normc)
    X = {b: xi * np.eye(k) for b, k in P.psd}
    S = {b: eta * np.eye(k) for b, k in P.psd}
    x = xi * np.ones(P.nlp)
    s = eta * np.ones(P.nlp)
    f = np.zeros(nf)
    y = np.zeros(m)

    # G = Q1 R1 and N spans the rest, so G'(y + N z) = G'y
    Qf, Rf = sla.qr(P.G, mode="full")
    Q1, R1, N = Qf[:, :nf], Rf[:nf, :], Qf[:, nf:]
    if nf and np.min(np.abs(np.diag(R1))) < 1e-12 * max(1.0, np.max(np.abs(np.diag(R1)))):
        sys.exit("free variables are linearly dependent")

    status = None
    best, best_merit, best_at = None, np.inf, 0
    for it in range(MAX_ITER):
        Ay = P.adj(y)
        rp = P.b - P.op(X, f, x)
        Rd = {b: P.C[b] - Ay[0][b] - S[b] for b, _ in P.psd}
        rlp = P.clp - Ay[1] - s
        rf = P.cf - Ay[2]
        gap = sum(np.sum(X[b] * S[b]) for b, _ in P.psd) + x @ s
        mu = gap / dims
        pobj = sum(np.sum(P.C[b] * X[b]) for b, _ in P.psd) + P.clp @ x + P.cf @ f
        dobj = P.b @ y
        pinf = np.linalg.norm(rp) / normb
        dinf = np.sqrt(
            sum(np.sum(Rd[b] ** 2) for b, _ in P.psd) + rlp @ rlp + rf @ rf
        ) / normc
        rgap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        if verbose:
            print(
                f"{it:3d} pobj {pobj:+.8e} dobj {dobj:+.8e} pinf {pinf:.1e} "
                f"dinf {dinf:.1e} gap {rgap:.1e} mu {mu:.1e}",
                file=sys.stderr,
            )
        merit = max(pinf / FEAS_TOL, dinf / FEAS_TOL, rgap / GAP_TOL)
        if merit < best_merit:
            best_merit, best_at = merit, it
            best = (
                {b: X[b].copy() for b in X}, {b: S[b].copy() for b in S},
                x.copy(), s.copy(), f.copy(), y.copy(),
            )
        if merit <= 1.0 or it - best_at >= STALL_ITERS:
            break
        # Farkas rays: y with A*(y) <= 0, G'y = 0, b'y > 0 means X infeasible
        if dobj > 0 and pinf > FEAS_TOL:
            ray = np.sqrt(
                sum(np.sum((Ay[0][b] + S[b]) ** 2) for b, _ in P.psd)
                + np.sum((Ay[1] + s) ** 2)
                + Ay[2] @ Ay[2]
            ) / dobj
            if ray < FEAS_TOL and dobj > 1e8 * normc:
                status = "pUNBD"
                break
        if pobj < 0 and dinf > FEAS_TOL:
            ray = np.linalg.norm(P.op(X, f, x)) / -pobj
            if ray < FEAS_TOL and -pobj > 1e8 * normb:
                status = "dUNBD"
                break

        Lx = {b: np.linalg.cholesky(X[b]) for b, _ in P.psd}
        Ls = {b: np.linalg.cholesky(S[b]) for b, _ in P.psd}
        # NT scaling: with Ls' Lx = U diag(lam) V' and Gs = Lx V diag(lam)^-1/2,
        # Gs^-1 X Gs^-T = Gs' S Gs = diag(lam) and W = Gs Gs' maps S to X
        Gs, Gi, lam, W = {}, {}, {}, {}
        for b, _ in P.psd:
            _, sv, vt = np.linalg.svd(Ls[b].T @ Lx[b])
            Gs[b] = Lx[b] @ vt.T / np.sqrt(sv)
            Gi[b] = (np.sqrt(sv)[:, None] * vt) @ sla.solve_triangular(Lx[b], np.eye(len(sv)), lower=True)
            lam[b] = sv
            W[b] = Gs[b] @ Gs[b].T
        M = P.schur(W, x, s)
        MN = M @ N
        R = N.T @ MN
        try:
            fac = sla.cho_factor(R, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            break

        def newton(h, rf):
            # dy = dy_p + N z with G' dy_p = rf, then f from the range of G
            dyp = Q1 @ sla.solve_triangular(R1, rf, trans="T", check_finite=False)
            target = N.T @ (h - M @ dyp)
            z = sla.cho_solve(fac, target, check_finite=False)
            dy = dyp + N @ z
            df = sla.solve_triangular(R1, Q1.T @ (h - M @ dy), check_finite=False)
            return dy, df

        def direction(target, corr_psd, corr_lp):
            # dX = Gs Rt Gs' - W Rd W + W A*(dy) W, where Rt solves the scaled
            # complementarity lam (dX~ + dS~) + (dX~ + dS~) lam = 2 (target - lam^2 - corr)
            H = {}
            for b, _ in P.psd:
                lb = lam[b]
                rt = -2 * corr_psd[b]
                rt[np.diag_indices_from(rt)] += 2 * (target - lb**2)
                rt /= lb[:, None] + lb[None, :]
                H[b] = Gs[b] @ rt @ Gs[b].T - W[b] @ Rd[b] @ W[b]
            h_lp = target / s - x - corr_lp / s - x * rlp / s
            rhs = rp - P.op(H, np.zeros(nf), h_lp)
            dy, df = newton(rhs, rf)
            for _ in range(REFINE_STEPS):
                # residual of the exact Newton map, not of the factored Schur matrix
                Ady = P.adj(dy)
                lhs = P.op({b: W[b] @ Ady[0][b] @ W[b] for b, _ in P.psd}, df, x * Ady[1] / s)
                ey, ef = newton(rhs - lhs, rf - Ady[2])
                dy, df = dy + ey, df + ef
            Ady = P.adj(dy)
            dS = {b: Rd[b] - Ady[0][b] for b, _ in P.psd}
            ds = rlp - Ady[1]
            dX = {b: sym(H[b] + W[b] @ Ady[0][b] @ W[b]) for b, _ in P.psd}
            dx = h_lp + x * Ady[1] / s
            return dX, dx, df, dy, dS, ds

        def steps(dX, dx, dS, ds):
            ap = min([lp_step(x, dx)] + [max_step(Lx[b], dX[b]) for b, _ in P.psd])
            ad = min(
                [lp_step(s, ds)]
                + [max_step(Ls[b], dS[b]) for b, _ in P.psd]
            )
            return ap, ad

        zero = {b: np.zeros((k, k)) for b, k in P.psd}
        dX, dx, df, dy, dS, ds = direction(0.0, zero, np.zeros(P.nlp))
        ap, ad = steps(dX, dx, dS, ds)
        ap, ad = min(1.0, ap), min(1.0, ad)
        gap_aff = sum(
            np.sum((X[b] + ap * dX[b]) * (S[b] + ad * dS[b])) for b, _ in P.psd
        ) + (x + ap * dx) @ (s + ad * ds)
        sigma = min(1.0, (gap_aff / gap) ** 3)

        corr = {b: sym((Gi[b] @ dX[b] @ Gi[b].T) @ (Gs[b].T @ dS[b] @ Gs[b])) for b, _ in P.psd}
        dX, dx, df, dy, dS, ds = direction(sigma * mu, corr, dx * ds)
        ap, ad = steps(dX, dx, dS, ds)
        ap, ad = min(1.0, STEP_FRACTION * ap), min(1.0, STEP_FRACTION * ad)

        for b, _ in P.psd:
            X[b] = sym(X[b] + ap * dX[b])
            S[b] = sym(S[b] + ad * dS[b])
        x = x + ap * dx
        f = f + ap * df
        s = s + ad * ds
        y = y + ad * dy

    if status is None:
        # the best iterate stands in for the last one, which may have stalled
        X, S, x, s, f, y = best
        status = "pdOPT" if best_merit <= 1.0 else "pdFEAS" if best_merit <= 1e3 else "noINFO"
    pobj = sum(np.sum(P.C[b] * X[b]) for b, _ in P.psd) + P.clp @ x + P.cf @ f
    full_y = np.zeros(P.row_scale.size)
    full_y[P.keep] = y
    return {
        "status": status,
        # SDPA's primal objective is c.x with x = -y, its dual is F0.Y
        "primal": -(P.b @ y),
        "dual": -pobj,
        "x": -(full_y * P.row_scale),
        "X": [X[b] * np.outer(P.psd_scale[b], P.psd_scale[b]) for b, _ in P.psd],
        "f": f * P.free_scale,
        "lp": x * P.lp_scale,
        "has_lp": P.lp > 0,
    }


def fmt(v):
    return repr(float(v))


def write(out, sol):
    phase = sol["status"]
    with open(out, "w") as fh:
        fh.write(f"phase.value = {phase}\n")
        fh.write(f"objValPrimal = {fmt(sol['primal'])}\n")
        fh.write(f"objValDual = {fmt(sol['dual'])}\n")
        if phase in ("pUNBD", "dUNBD"):
            return
        fh.write("xVec = \n{" + ",".join(fmt(v) for v in sol["x"]) + "}\n")
        fh.write("yMat = \n{\n")
        if sol["has_lp"]:
            diag = []
            for v in sol["f"]:
                diag += [max(v, 0.0), max(-v, 0.0)]
            diag += list(sol["lp"])
            fh.write("{" + ",".join(fmt(v) for v in diag) + "}\n")
        for Z in sol["X"]:
            rows = ["{" + ",".join(fmt(v) for v in row) + "}" for row in Z]
            fh.write("{" + ",\n".join(rows) + "}\n")
        fh.write("}\n")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    write(sys.argv[2], solve(sys.argv[1]))
