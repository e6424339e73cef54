//! Block eigensolver for the symmetrised problem `B y = θ y` with
//! `B = M^{-1/2} A M^{-1/2}`, preconditioned by a multigrid cycle for the
//! stencil `A`.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{SpectralProblem, NONE};
use super::multigrid::Multigrid;
use crate::error::{invalid, Error, Result};

/// Solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigOptions {
    /// Number of wanted eigenpairs.
    pub k: usize,
    /// Relative residual target `‖B y − θ y‖ / θ`.
    pub tol: f64,
    pub max_iter: usize,
    /// Block size; defaults to `k + max(3, k/2)`.
    pub block: Option<usize>,
    pub seed: u64,
    /// Polish the ground state by shifted inverse iteration, which makes the
    /// pointwise quotient `(A v)ᵢ / (M v)ᵢ` accurate near the boundary.
    pub refine: bool,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            k: 1,
            tol: 1e-8,
            max_iter: 2000,
            block: None,
            seed: 0,
            refine: true,
        }
    }
}

impl EigOptions {
    pub fn new(k: usize, tol: f64) -> Self {
        EigOptions {
            k,
            tol,
            ..Default::default()
        }
    }

    fn block_size(&self) -> usize {
        self.block
            .unwrap_or(self.k + (self.k / 2).max(3))
            .max(self.k)
    }
}

/// Eigenpairs of `A v = μ M v`, ascending.
#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub eigenvalues: Vec<f64>,
    /// Interior vectors normalised to `vᵀ M v = 1`.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
    /// `‖M^{-1/2}(A v − μ M v)‖ / (μ ‖v‖_M)`.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

type Block = Vec<Vec<f64>>;

/// Problems at or below this size are solved densely.
const DENSE_LIMIT: usize = 600;

struct Operator<'a> {
    p: &'a SpectralProblem,
    /// `M^{-1/2}`.
    s: Vec<f64>,
    /// `M^{1/2}`.
    sinv: Vec<f64>,
    mg: Option<Multigrid>,
}

impl<'a> Operator<'a> {
    fn new(p: &'a SpectralProblem) -> Self {
        let s: Vec<f64> = p.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
        let sinv: Vec<f64> = p.mass.iter().map(|m| m.sqrt()).collect();
        Operator {
            p,
            s,
            sinv,
            mg: None,
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (nbr, s) = (&self.p.nbr, &self.s);
        y.par_iter_mut().enumerate().for_each(|(k, yk)| {
            let mut acc = 4.0 * s[k] * x[k];
            for &m in &nbr[k] {
                if m != NONE {
                    acc -= s[m as usize] * x[m as usize];
                }
            }
            *yk = s[k] * acc;
        });
    }

    fn apply_block(&self, x: &Block) -> Block {
        x.iter()
            .map(|c| {
                let mut y = vec![0.0; c.len()];
                self.apply(c, &mut y);
                y
            })
            .collect()
    }

    /// `z ≈ B⁻¹ r = M^{1/2} A⁻¹ M^{1/2} r`.
    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let b: Vec<f64> = r.iter().zip(&self.sinv).map(|(a, s)| a * s).collect();
        let mut t = self.mg.as_ref().expect("preconditioner built").solve(&b);
        for (tk, sk) in t.iter_mut().zip(&self.sinv) {
            *tk *= sk;
        }
        t
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gram(a: &Block, b: &Block) -> DMatrix<f64> {
    let pairs: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
        .collect();
    let vals: Vec<f64> = pairs.par_iter().map(|&(i, j)| dot(&a[i], &b[j])).collect();
    let mut g = DMatrix::zeros(a.len(), b.len());
    for (&(i, j), v) in pairs.iter().zip(vals) {
        g[(i, j)] = v;
    }
    g
}

fn sym_gram(a: &Block) -> DMatrix<f64> {
    let g = gram(a, a);
    (&g + g.transpose()) * 0.5
}

/// Columns `Σ_i c[(i, j)] cols[i]`.
fn combine(cols: &[&Vec<f64>], c: &DMatrix<f64>) -> Block {
    let n = cols.first().map_or(0, |v| v.len());
    (0..c.ncols())
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; n];
            for (i, col) in cols.iter().enumerate() {
                let f = c[(i, j)];
                if f != 0.0 {
                    for (o, x) in out.iter_mut().zip(col.iter()) {
                        *o += f * x;
                    }
                }
            }
            out
        })
        .collect()
}

/// Removes the components along the orthonormal block `x`.
fn project_out(v: &mut Block, x: &Block) {
    if x.is_empty() || v.is_empty() {
        return;
    }
    let c = gram(x, v);
    v.par_iter_mut().enumerate().for_each(|(j, col)| {
        for (i, xi) in x.iter().enumerate() {
            let f = c[(i, j)];
            for (o, a) in col.iter_mut().zip(xi) {
                *o -= f * a;
            }
        }
    });
}

/// Orthonormalises `v`, dropping numerically dependent directions.
fn svqb(v: &Block) -> Block {
    let v: Block = v.iter().filter(|c| dot(c, c) > 0.0).cloned().collect();
    if v.is_empty() {
        return v;
    }
    let g = sym_gram(&v);
    let d: Vec<f64> = (0..v.len()).map(|i| 1.0 / g[(i, i)].sqrt()).collect();
    let mut scaled = g.clone();
    for i in 0..v.len() {
        for j in 0..v.len() {
            scaled[(i, j)] *= d[i] * d[j];
        }
    }
    let eig = SymmetricEigen::new(scaled);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..v.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-13 * top)
        .collect();
    let mut c = DMatrix::zeros(v.len(), keep.len());
    for (jj, &j) in keep.iter().enumerate() {
        let f = 1.0 / eig.eigenvalues[j].sqrt();
        for i in 0..v.len() {
            c[(i, jj)] = d[i] * eig.eigenvectors[(i, j)] * f;
        }
    }
    let refs: Vec<&Vec<f64>> = v.iter().collect();
    combine(&refs, &c)
}

fn orthonormal_complement(mut v: Block, x: &Block) -> Block {
    for _ in 0..2 {
        project_out(&mut v, x);
        v = svqb(&v);
    }
    v
}

fn sorted_eigen(h: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(eig.eigenvectors.nrows(), order.len());
    for (jj, &j) in order.iter().enumerate() {
        vecs.set_column(jj, &eig.eigenvectors.column(j));
    }
    (vals, vecs)
}

fn residuals(x: &Block, bx: &Block, theta: &[f64]) -> (Block, Vec<f64>) {
    let r: Block = x
        .iter()
        .zip(bx)
        .zip(theta)
        .map(|((xc, bc), &t)| bc.iter().zip(xc).map(|(b, a)| b - t * a).collect())
        .collect();
    let norms = r
        .iter()
        .zip(theta)
        .map(|(c, &t)| dot(c, c).sqrt() / t.abs().max(f64::MIN_POSITIVE))
        .collect();
    (r, norms)
}

/// The `k` smallest eigenpairs of `A v = μ M v`.
pub fn smallest_eigs(problem: &SpectralProblem, opts: &EigOptions) -> Result<EigenResult> {
    let n = problem.len();
    if opts.k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if opts.k > n {
        return Err(invalid(format!(
            "k = {} exceeds the {n} interior unknowns",
            opts.k
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let mut op = Operator::new(problem);
    let nb = opts.block_size();
    if n <= DENSE_LIMIT.max(3 * nb) {
        return dense(problem, &op, opts.k);
    }
    op.mg = Some(Multigrid::new(problem));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Block = (0..nb)
        .map(|j| {
            if j == 0 {
                vec![1.0; n]
            } else {
                (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
            }
        })
        .collect();
    x = svqb(&x);
    if x.len() < nb {
        return Err(invalid("could not build an independent starting block"));
    }
    let mut bx = op.apply_block(&x);
    let (mut theta, c) = sorted_eigen(sym_gram_pair(&x, &bx));
    let xr: Vec<&Vec<f64>> = x.iter().collect();
    x = combine(&xr, &c);
    bx = op.apply_block(&x);
    let mut p: Block = Vec::new();
    let mut best = f64::INFINITY;

    for it in 1..=opts.max_iter {
        let (r, res) = residuals(&x, &bx, &theta);
        let worst = res[..opts.k].iter().cloned().fold(0.0, f64::max);
        best = best.min(worst);
        if worst <= opts.tol {
            return Ok(finish(problem, &op, x, theta, opts, it));
        }
        let w: Block = r
            .iter()
            .zip(&res)
            .filter(|(_, &rn)| rn > opts.tol)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|(rc, _)| op.precondition(rc))
            .collect();
        let mut q = w;
        q.append(&mut p);
        let q = orthonormal_complement(q, &x);
        if q.is_empty() {
            break;
        }
        let bq = op.apply_block(&q);
        let mut s: Vec<&Vec<f64>> = x.iter().collect();
        s.extend(q.iter());
        let mut bs: Vec<&Vec<f64>> = bx.iter().collect();
        bs.extend(bq.iter());
        let dim = s.len();
        let mut h = DMatrix::zeros(dim, dim);
        let pairs: Vec<(usize, usize)> = (0..dim)
            .flat_map(|i| (i..dim).map(move |j| (i, j)))
            .collect();
        let vals: Vec<f64> = pairs.par_iter().map(|&(i, j)| dot(s[i], bs[j])).collect();
        for (&(i, j), v) in pairs.iter().zip(vals) {
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
        let (vals, vecs) = sorted_eigen(h);
        let c = vecs.columns(0, nb).into_owned();
        let cq = c.rows(nb, dim - nb).into_owned();
        let qr: Vec<&Vec<f64>> = q.iter().collect();
        p = combine(&qr, &cq);
        x = combine(&s, &c);
        if it % 16 == 0 {
            x = svqb(&x);
            if x.len() < nb {
                return Err(Error::NoConvergence {
                    iterations: it,
                    residual: best,
                });
            }
        }
        bx = op.apply_block(&x);
        theta = vals[..nb].to_vec();
        if it % 16 == 0 {
            // refresh Ritz values after re-orthonormalisation
            let (t, c) = sorted_eigen(sym_gram_pair(&x, &bx));
            let xr: Vec<&Vec<f64>> = x.iter().collect();
            x = combine(&xr, &c);
            bx = op.apply_block(&x);
            theta = t;
        }
    }
    let (_, res) = residuals(&x, &bx, &theta);
    let worst = res[..opts.k].iter().cloned().fold(0.0, f64::max);
    if worst <= opts.tol {
        return Ok(finish(problem, &op, x, theta, opts, opts.max_iter));
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual: best.min(worst),
    })
}

fn sym_gram_pair(x: &Block, bx: &Block) -> DMatrix<f64> {
    let g = gram(x, bx);
    (&g + g.transpose()) * 0.5
}

fn finish(
    problem: &SpectralProblem,
    op: &Operator,
    mut x: Block,
    theta: Vec<f64>,
    opts: &EigOptions,
    iterations: usize,
) -> EigenResult {
    let k = opts.k;
    if opts.refine && op.mg.is_some() {
        refine_ground(problem, op, &mut x[0]);
    }
    let bx = op.apply_block(&x[..k].to_vec());
    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut res = Vec::with_capacity(k);
    for j in 0..k {
        let y = &x[j];
        let norm = dot(y, y).sqrt();
        // Rayleigh quotient of the final vector
        let t = dot(y, &bx[j]) / (norm * norm);
        let r: f64 = bx[j]
            .iter()
            .zip(y)
            .map(|(b, a)| (b - t * a).powi(2))
            .sum::<f64>()
            .sqrt()
            / (norm * t.abs());
        let mut v: Vec<f64> = y.iter().zip(&op.s).map(|(a, s)| a * s / norm).collect();
        // sign convention: positive sum
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        eigenvalues.push(t);
        vectors.push(v);
        res.push(r);
    }
    let _ = theta;
    debug_assert_eq!(vectors[0].len(), problem.len());
    EigenResult {
        eigenvalues,
        vectors,
        residuals: res,
        iterations,
    }
}

fn dense(problem: &SpectralProblem, op: &Operator, k: usize) -> Result<EigenResult> {
    let n = problem.len();
    let mut b = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            b[(i, j)] = col[i];
        }
    }
    let b = (&b + b.transpose()) * 0.5;
    let (vals, vecs) = sorted_eigen(b);
    let x: Block = (0..k)
        .map(|j| vecs.column(j).iter().cloned().collect())
        .collect();
    let opts = EigOptions {
        k,
        refine: false,
        ..Default::default()
    };
    Ok(finish(problem, op, x, vals[..k].to_vec(), &opts, 0))
}

/// Shifted inverse iteration steps for the ground state.
const REFINE_STEPS: usize = 3;
/// Relative shift below the current Rayleigh quotient.
const REFINE_SHIFT: f64 = 1e-3;

/// Replaces the symmetrised ground state `y` by a few steps of inverse
/// iteration `(A − σM) x = M v`, each solved by multigrid-preconditioned
/// conjugate gradients. Leaves `y` untouched if the shifted operator turns
/// out indefinite, which means `y` was not the ground state.
fn refine_ground(problem: &SpectralProblem, op: &Operator, y: &mut [f64]) {
    let mg = op.mg.as_ref().unwrap();
    let mass = &problem.mass;
    let mut v: Vec<f64> = y.iter().zip(&op.s).map(|(a, s)| a * s).collect();
    let mut av = vec![0.0; v.len()];
    problem.apply_stiffness(&v, &mut av);
    let mu = dot(&v, &av) / v.iter().zip(mass).map(|(a, m)| a * a * m).sum::<f64>();
    let sigma = mu * (1.0 - REFINE_SHIFT);
    for _ in 0..REFINE_STEPS {
        let b: Vec<f64> = v.iter().zip(mass).map(|(a, m)| a * m).collect();
        let Some(x) = shifted_cg(problem, mg, sigma, &b) else {
            return;
        };
        let norm = x
            .iter()
            .zip(mass)
            .map(|(a, m)| a * a * m)
            .sum::<f64>()
            .sqrt();
        v = x.iter().map(|a| a / norm).collect();
    }
    for ((yk, vk), s) in y.iter_mut().zip(&v).zip(&op.sinv) {
        *yk = vk * s;
    }
}

fn shifted_cg(
    problem: &SpectralProblem,
    mg: &Multigrid,
    sigma: f64,
    b: &[f64],
) -> Option<Vec<f64>> {
    let n = b.len();
    let apply = |x: &[f64], y: &mut [f64]| {
        problem.apply_stiffness(x, y);
        for ((yk, xk), m) in y.iter_mut().zip(x).zip(&problem.mass) {
            *yk -= sigma * m * xk;
        }
    };
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = mg.solve(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    for _ in 0..500 {
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return None;
        }
        let alpha = rz / pq;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        if dot(&r, &r).sqrt() <= 1e-14 * bnorm {
            break;
        }
        z = mg.solve(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    Some(x)
}
