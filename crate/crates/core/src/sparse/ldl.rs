//! Supernodal multifrontal LDL^H factorization of Hermitian matrices.
//!
//! The symbolic phase (ordering, elimination tree, supernode structure) only
//! depends on the sparsity pattern and is shared by every matrix with that
//! pattern; the DPG operators at the different contour nodes reuse one
//! analysis.

use std::sync::Arc;

use num_complex::Complex64;

use super::ordering::{AdjacencyGraph, Ordering};
use super::{HermitianSparse, SparseError};

const NONE: usize = usize::MAX;
/// Column block width of the dense partial factorization.
const PANEL: usize = 48;

#[derive(Debug, Clone)]
pub struct SymbolicLdl {
    n: usize,
    /// perm[new] = old
    perm: Vec<usize>,
    super_start: Vec<usize>,
    rows_ptr: Vec<usize>,
    rows: Vec<usize>,
    lval_ptr: Vec<usize>,
    nchildren: Vec<usize>,
    // lower-triangle entries of the permuted matrix, by column
    a_col_ptr: Vec<usize>,
    a_rows: Vec<usize>,
    a_src: Vec<usize>,
    // pattern the analysis was built for
    pattern_row_ptr: Vec<usize>,
    pattern_col_idx: Vec<usize>,
}

impl SymbolicLdl {
    pub fn analyze(a: &HermitianSparse, ordering: Ordering) -> Result<Self, SparseError> {
        if a.nrows() != a.ncols() {
            return Err(SparseError::NotSquare(a.nrows(), a.ncols()));
        }
        let n = a.nrows();
        let adj = a.symmetric_adjacency();
        let graph = AdjacencyGraph::from_lists(&adj);
        let perm0 = ordering.compute(&graph);

        // postorder the elimination tree so supernodes are contiguous and
        // children precede parents
        let parent0 = etree(&adj, &perm0);
        let post = postorder(&parent0);
        let perm: Vec<usize> = post.iter().map(|&k| perm0[k]).collect();
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let parent = etree(&adj, &perm);

        // row-wise strictly lower structure in the new numbering
        let mut rowlow: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (old, nbrs) in adj.iter().enumerate() {
            let i = iperm[old];
            for &o in nbrs {
                let j = iperm[o];
                if j < i {
                    rowlow[i].push(j);
                }
            }
        }

        // column counts of L (including the diagonal) from row subtrees
        let mut count = vec![1usize; n];
        let mut mark = vec![NONE; n];
        for i in 0..n {
            mark[i] = i;
            for &j in &rowlow[i] {
                let mut k = j;
                while mark[k] != i {
                    count[k] += 1;
                    mark[k] = i;
                    k = parent[k];
                }
            }
        }

        let mut nchild_col = vec![0usize; n];
        for &p in &parent {
            if p != NONE {
                nchild_col[p] += 1;
            }
        }
        let mut super_start = vec![0];
        for j in 1..n {
            let merge = parent[j - 1] == j && count[j - 1] == count[j] + 1 && nchild_col[j] == 1;
            if !merge {
                super_start.push(j);
            }
        }
        if n > 0 {
            super_start.push(n);
        }
        let nsuper = super_start.len().saturating_sub(1);
        let mut snode = vec![0usize; n];
        for s in 0..nsuper {
            for j in super_start[s]..super_start[s + 1] {
                snode[j] = s;
            }
        }
        let mut sparent = vec![NONE; nsuper];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nsuper];
        for s in 0..nsuper {
            let last = super_start[s + 1] - 1;
            if parent[last] != NONE {
                sparent[s] = snode[parent[last]];
                children[sparent[s]].push(s);
            }
        }
        let nchildren = children.iter().map(Vec::len).collect();

        // lower entries of the permuted matrix by column, with their source
        let mut a_col_ptr = vec![0usize; n + 1];
        for old_r in 0..n {
            for (old_c, _) in a.row(old_r) {
                if iperm[old_r] >= iperm[old_c] {
                    a_col_ptr[iperm[old_c] + 1] += 1;
                }
            }
        }
        for j in 0..n {
            a_col_ptr[j + 1] += a_col_ptr[j];
        }
        let mut fill = a_col_ptr.clone();
        let mut a_rows = vec![0; a_col_ptr[n]];
        let mut a_src = vec![0; a_col_ptr[n]];
        for old_r in 0..n {
            let start = a.row_ptr()[old_r];
            for (t, &old_c) in a.col_idx()[start..a.row_ptr()[old_r + 1]].iter().enumerate() {
                let (i, j) = (iperm[old_r], iperm[old_c]);
                if i >= j {
                    a_rows[fill[j]] = i;
                    a_src[fill[j]] = start + t;
                    fill[j] += 1;
                }
            }
        }

        // supernode row structures
        let mut rows_ptr = vec![0usize];
        let mut rows: Vec<usize> = Vec::new();
        let mut lval_ptr = vec![0usize];
        let mut stamp = vec![NONE; n];
        for s in 0..nsuper {
            let (f, l) = (super_start[s], super_start[s + 1] - 1);
            let begin = rows.len();
            for j in f..=l {
                rows.push(j);
                stamp[j] = s;
            }
            for j in f..=l {
                for &i in &a_rows[a_col_ptr[j]..a_col_ptr[j + 1]] {
                    if i > l && stamp[i] != s {
                        stamp[i] = s;
                        rows.push(i);
                    }
                }
            }
            for &c in &children[s] {
                for idx in rows_ptr[c]..rows_ptr[c + 1] {
                    let i = rows[idx];
                    if i > l && stamp[i] != s {
                        stamp[i] = s;
                        rows.push(i);
                    }
                }
            }
            rows[begin + (l - f + 1)..].sort_unstable();
            debug_assert_eq!(rows.len() - begin, count[f]);
            rows_ptr.push(rows.len());
            let r = rows.len() - begin;
            lval_ptr.push(lval_ptr.last().unwrap() + r * (l - f + 1));
        }

        Ok(Self {
            n,
            perm,
            super_start,
            rows_ptr,
            rows,
            lval_ptr,
            nchildren,
            a_col_ptr,
            a_rows,
            a_src,
            pattern_row_ptr: a.row_ptr().to_vec(),
            pattern_col_idx: a.col_idx().to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Elimination order, `perm[k]` = original index eliminated k-th.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn supernode_count(&self) -> usize {
        self.super_start.len().saturating_sub(1)
    }

    /// Stored entries of L including the unit diagonal.
    pub fn nnz_l(&self) -> usize {
        *self.lval_ptr.last().unwrap_or(&0)
    }

    fn super_rows(&self, s: usize) -> &[usize] {
        &self.rows[self.rows_ptr[s]..self.rows_ptr[s + 1]]
    }

    fn matches(&self, a: &HermitianSparse) -> bool {
        a.nrows() == self.n
            && a.row_ptr() == self.pattern_row_ptr.as_slice()
            && a.col_idx() == self.pattern_col_idx.as_slice()
    }
}

/// Elimination tree of the matrix permuted by `perm` (perm[new] = old).
fn etree(adj: &[Vec<usize>], perm: &[usize]) -> Vec<usize> {
    let n = perm.len();
    let mut iperm = vec![0; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for i in 0..n {
        for &o in &adj[perm[i]] {
            let mut k = iperm[o];
            if k >= i {
                continue;
            }
            while ancestor[k] != NONE && ancestor[k] != i {
                let next = ancestor[k];
                ancestor[k] = i;
                k = next;
            }
            if ancestor[k] == NONE {
                ancestor[k] = i;
                parent[k] = i;
            }
        }
    }
    parent
}

fn postorder(parent: &[usize]) -> Vec<usize> {
    let n = parent.len();
    let mut head = vec![NONE; n];
    let mut next = vec![NONE; n];
    // insert in reverse so children are visited in increasing order
    for j in (0..n).rev() {
        if parent[j] != NONE {
            next[j] = head[parent[j]];
            head[parent[j]] = j;
        }
    }
    let mut post = Vec::with_capacity(n);
    let mut stack = Vec::new();
    for root in 0..n {
        if parent[root] != NONE {
            continue;
        }
        stack.push(root);
        while let Some(&top) = stack.last() {
            let child = head[top];
            if child == NONE {
                stack.pop();
                post.push(top);
            } else {
                head[top] = next[child];
                stack.push(child);
            }
        }
    }
    post
}

/// Numeric LDL^H factor `P A P^T = L D L^H`.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    symbolic: Arc<SymbolicLdl>,
    lvals: Vec<Complex64>,
    d: Vec<f64>,
    matrix: Arc<HermitianSparse>,
}

/// Analyzes with nested dissection and factors.
pub fn factor_hpd(a: &HermitianSparse) -> Result<LdlFactor, SparseError> {
    let symbolic = Arc::new(SymbolicLdl::analyze(a, Ordering::default())?);
    factor_hpd_with(&symbolic, Arc::new(a.clone()))
}

/// Numeric factorization against an existing analysis of the same pattern.
pub fn factor_hpd_with(
    symbolic: &Arc<SymbolicLdl>,
    a: Arc<HermitianSparse>,
) -> Result<LdlFactor, SparseError> {
    assert!(
        symbolic.matches(&a),
        "matrix pattern differs from the analyzed pattern"
    );
    let sym = symbolic.as_ref();
    let n = sym.n;
    let values = a.values();
    let mut lvals = vec![Complex64::new(0.0, 0.0); sym.nnz_l()];
    let mut d = vec![0.0; n];
    let mut pos = vec![0usize; n];
    let mut stack: Vec<(usize, Vec<Complex64>)> = Vec::new();

    for s in 0..sym.supernode_count() {
        let rows = sym.super_rows(s);
        let f = sym.super_start[s];
        let k = sym.super_start[s + 1] - f;
        let r = rows.len();
        for (p, &i) in rows.iter().enumerate() {
            pos[i] = p;
        }
        let mut front = vec![Complex64::new(0.0, 0.0); r * r];
        for c in 0..k {
            let j = f + c;
            for t in sym.a_col_ptr[j]..sym.a_col_ptr[j + 1] {
                front[pos[sym.a_rows[t]] + c * r] += values[sym.a_src[t]];
            }
        }
        for _ in 0..sym.nchildren[s] {
            let (child, update) = stack.pop().expect("child update present");
            let crows = sym.super_rows(child);
            let ck = sym.super_start[child + 1] - sym.super_start[child];
            let map: Vec<usize> = crows[ck..].iter().map(|&i| pos[i]).collect();
            let m = map.len();
            for (b, &cb) in map.iter().enumerate() {
                let col = &update[b * m..(b + 1) * m];
                let dst = cb * r;
                for a in b..m {
                    front[map[a] + dst] += col[a];
                }
            }
        }

        partial_ldl(&mut front, r, k, &mut d[f..f + k]).map_err(|(c, value)| {
            SparseError::NonPositivePivot {
                row: sym.perm[f + c],
                value,
            }
        })?;

        let lblock = &mut lvals[sym.lval_ptr[s]..sym.lval_ptr[s + 1]];
        lblock.copy_from_slice(&front[..r * k]);
        let m = r - k;
        if m > 0 {
            let mut update = vec![Complex64::new(0.0, 0.0); m * m];
            for b in 0..m {
                let src = (k + b) * r + k;
                update[b * m + b..(b + 1) * m].copy_from_slice(&front[src + b..src + m]);
            }
            stack.push((s, update));
        }
    }
    debug_assert!(stack.is_empty());
    Ok(LdlFactor {
        symbolic: Arc::clone(symbolic),
        lvals,
        d,
        matrix: a,
    })
}

/// Factors the first `k` columns of the Hermitian front (column-major,
/// lower triangle referenced) and leaves the Schur complement in the
/// trailing block. On failure returns (column, pivot).
fn partial_ldl(front: &mut [Complex64], r: usize, k: usize, d: &mut [f64]) -> Result<(), (usize, f64)> {
    let mut c0 = 0;
    while c0 < k {
        let c1 = (c0 + PANEL).min(k);
        for c in c0..c1 {
            let piv = front[c + c * r].re;
            if !(piv > 0.0) || !piv.is_finite() {
                return Err((c, piv));
            }
            d[c] = piv;
            let inv = 1.0 / piv;
            let (head, tail) = front.split_at_mut((c + 1) * r);
            let col = &head[c * r..];
            for j in c + 1..c1 {
                let t = col[j].conj() * inv;
                let dst = &mut tail[(j - c - 1) * r..(j - c) * r];
                for i in j..r {
                    dst[i] -= col[i] * t;
                }
            }
            let col = &mut front[c * r..(c + 1) * r];
            for v in &mut col[c + 1..r] {
                *v *= inv;
            }
        }
        if c1 < r {
            block_update(front, r, c0, c1, d);
        }
        c0 = c1;
    }
    Ok(())
}

/// front[i, j] -= sum_{c in c0..c1} L[i, c] d_c conj(L[j, c]) for c1 <= j <= i < r.
fn block_update(front: &mut [Complex64], r: usize, c0: usize, c1: usize, d: &[f64]) {
    let w = c1 - c0;
    let m = r - c1;
    // row-major split copies of the panel: x = L, y = D L^H
    let mut xr = vec![0.0; m * w];
    let mut xi = vec![0.0; m * w];
    let mut yr = vec![0.0; m * w];
    let mut yi = vec![0.0; m * w];
    for c in 0..w {
        let col = &front[(c0 + c) * r + c1..(c0 + c + 1) * r];
        let dc = d[c0 + c];
        for (a, v) in col.iter().enumerate() {
            xr[a * w + c] = v.re;
            xi[a * w + c] = v.im;
            yr[a * w + c] = dc * v.re;
            yi[a * w + c] = -dc * v.im;
        }
    }
    let dot = |a: usize, b: usize| -> (f64, f64) {
        let (xa_r, xa_i) = (&xr[a * w..(a + 1) * w], &xi[a * w..(a + 1) * w]);
        let (yb_r, yb_i) = (&yr[b * w..(b + 1) * w], &yi[b * w..(b + 1) * w]);
        let mut sr = 0.0;
        let mut si = 0.0;
        for c in 0..w {
            sr += xa_r[c] * yb_r[c] - xa_i[c] * yb_i[c];
            si += xa_r[c] * yb_i[c] + xa_i[c] * yb_r[c];
        }
        (sr, si)
    };
    // 2x2 register blocks
    let mut b = 0;
    while b < m {
        if b + 1 < m {
            let (b0, b1) = (b, b + 1);
            let col0 = (c1 + b0) * r + c1;
            let col1 = (c1 + b1) * r + c1;
            // diagonal pair rows b0, b1
            let (s, t) = dot(b0, b0);
            front[col0 + b0] -= Complex64::new(s, t);
            let (s, t) = dot(b1, b0);
            front[col0 + b1] -= Complex64::new(s, t);
            let (s, t) = dot(b1, b1);
            front[col1 + b1] -= Complex64::new(s, t);
            let (y0r, y0i) = (&yr[b0 * w..(b0 + 1) * w], &yi[b0 * w..(b0 + 1) * w]);
            let (y1r, y1i) = (&yr[b1 * w..(b1 + 1) * w], &yi[b1 * w..(b1 + 1) * w]);
            let mut a = b + 2;
            while a + 1 < m {
                let (xa0r, xa0i) = (&xr[a * w..(a + 1) * w], &xi[a * w..(a + 1) * w]);
                let (xa1r, xa1i) = (&xr[(a + 1) * w..(a + 2) * w], &xi[(a + 1) * w..(a + 2) * w]);
                let (mut s00r, mut s00i, mut s01r, mut s01i) = (0.0, 0.0, 0.0, 0.0);
                let (mut s10r, mut s10i, mut s11r, mut s11i) = (0.0, 0.0, 0.0, 0.0);
                for c in 0..w {
                    let (p0r, p0i, p1r, p1i) = (xa0r[c], xa0i[c], xa1r[c], xa1i[c]);
                    let (q0r, q0i, q1r, q1i) = (y0r[c], y0i[c], y1r[c], y1i[c]);
                    s00r += p0r * q0r - p0i * q0i;
                    s00i += p0r * q0i + p0i * q0r;
                    s01r += p0r * q1r - p0i * q1i;
                    s01i += p0r * q1i + p0i * q1r;
                    s10r += p1r * q0r - p1i * q0i;
                    s10i += p1r * q0i + p1i * q0r;
                    s11r += p1r * q1r - p1i * q1i;
                    s11i += p1r * q1i + p1i * q1r;
                }
                front[col0 + a] -= Complex64::new(s00r, s00i);
                front[col1 + a] -= Complex64::new(s01r, s01i);
                front[col0 + a + 1] -= Complex64::new(s10r, s10i);
                front[col1 + a + 1] -= Complex64::new(s11r, s11i);
                a += 2;
            }
            if a < m {
                let (s, t) = dot(a, b0);
                front[col0 + a] -= Complex64::new(s, t);
                let (s, t) = dot(a, b1);
                front[col1 + a] -= Complex64::new(s, t);
            }
            b += 2;
        } else {
            let col0 = (c1 + b) * r + c1;
            let (s, t) = dot(b, b);
            front[col0 + b] -= Complex64::new(s, t);
            b += 1;
        }
    }
}

impl LdlFactor {
    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn symbolic(&self) -> &Arc<SymbolicLdl> {
        &self.symbolic
    }

    pub fn matrix(&self) -> &HermitianSparse {
        &self.matrix
    }

    /// Pivots of D in elimination order.
    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn nnz_l(&self) -> usize {
        self.symbolic.nnz_l()
    }

    /// Solves A X = B for a column-major block with `nrhs` columns.
    pub fn solve(&self, rhs: &[Complex64], nrhs: usize) -> Vec<Complex64> {
        let n = self.dim();
        assert_eq!(rhs.len(), n * nrhs, "right-hand side has the wrong size");
        let sym = self.symbolic.as_ref();
        // permuted, row-major work array
        let mut x = vec![Complex64::new(0.0, 0.0); n * nrhs];
        for (new, &old) in sym.perm.iter().enumerate() {
            for c in 0..nrhs {
                x[new * nrhs + c] = rhs[c * n + old];
            }
        }
        let mut xj = vec![Complex64::new(0.0, 0.0); nrhs];
        for s in 0..sym.supernode_count() {
            let rows = sym.super_rows(s);
            let f = sym.super_start[s];
            let k = sym.super_start[s + 1] - f;
            let r = rows.len();
            let lb = &self.lvals[sym.lval_ptr[s]..sym.lval_ptr[s + 1]];
            for c in 0..k {
                xj.copy_from_slice(&x[(f + c) * nrhs..(f + c + 1) * nrhs]);
                for p in c + 1..r {
                    let l = lb[c * r + p];
                    let dst = &mut x[rows[p] * nrhs..(rows[p] + 1) * nrhs];
                    for (v, &w) in dst.iter_mut().zip(&xj) {
                        *v -= l * w;
                    }
                }
            }
        }
        for (j, &dj) in self.d.iter().enumerate() {
            let inv = 1.0 / dj;
            for v in &mut x[j * nrhs..(j + 1) * nrhs] {
                *v *= inv;
            }
        }
        for s in (0..sym.supernode_count()).rev() {
            let rows = sym.super_rows(s);
            let f = sym.super_start[s];
            let k = sym.super_start[s + 1] - f;
            let r = rows.len();
            let lb = &self.lvals[sym.lval_ptr[s]..sym.lval_ptr[s + 1]];
            for c in (0..k).rev() {
                xj.copy_from_slice(&x[(f + c) * nrhs..(f + c + 1) * nrhs]);
                for p in c + 1..r {
                    let l = lb[c * r + p].conj();
                    let src = &x[rows[p] * nrhs..(rows[p] + 1) * nrhs];
                    for (v, &w) in xj.iter_mut().zip(src) {
                        *v -= l * w;
                    }
                }
                x[(f + c) * nrhs..(f + c + 1) * nrhs].copy_from_slice(&xj);
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n * nrhs];
        for (new, &old) in sym.perm.iter().enumerate() {
            for c in 0..nrhs {
                out[c * n + old] = x[new * nrhs + c];
            }
        }
        #[cfg(debug_assertions)]
        self.check_backward_error(rhs, &out, nrhs);
        out
    }

    /// Normwise backward error check of a computed solution.
    #[cfg(debug_assertions)]
    fn check_backward_error(&self, rhs: &[Complex64], x: &[Complex64], nrhs: usize) {
        let n = self.dim();
        let norm_a = (0..n)
            .map(|r| self.matrix.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let ax = self.matrix.mul_block(x, nrhs);
        for c in 0..nrhs {
            let col = c * n..(c + 1) * n;
            let res = ax[col.clone()]
                .iter()
                .zip(&rhs[col.clone()])
                .fold(0.0f64, |m, (u, v)| m.max((u - v).norm()));
            let bnorm = rhs[col.clone()].iter().fold(0.0f64, |m, v| m.max(v.norm()));
            let xnorm = x[col].iter().fold(0.0f64, |m, v| m.max(v.norm()));
            debug_assert!(
                res <= 1e-10 * (bnorm + norm_a * xnorm) || !res.is_finite() && bnorm == 0.0,
                "LDL^H solve backward error too large: {res:e}"
            );
        }
    }
}

/// Solves with a factorization; `rhs` is column-major with `nrhs` columns.
pub fn solve(factor: &LdlFactor, rhs: &[Complex64], nrhs: usize) -> Vec<Complex64> {
    factor.solve(rhs, nrhs)
}
