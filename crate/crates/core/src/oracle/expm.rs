//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! (degree 3, 5, 7, 9 or 13 chosen from the 1-norm).

use ndarray::{s, Array2, Zip};
use num_complex::Complex64;

use super::{GeneratorMatrix, TransitionMatrix};
use crate::error::{Error, Result};

/// Largest `max |S^dagger S - I|` accepted from [`exponentiate`].
pub const RESIDUAL_LIMIT: f64 = 1e-11;

// Backward-error thresholds for the 1-norm at each Padé degree.
const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068;
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &Array2<Complex64>) -> f64 {
    a.columns()
        .into_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn identity(n: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(n, Complex64::new(1.0, 0.0))
}

/// `sum_k coeffs[k] * terms[k]`.
fn combine(coeffs: &[f64], terms: &[&Array2<Complex64>]) -> Array2<Complex64> {
    let mut out = Array2::zeros(terms[0].raw_dim());
    for (&c, t) in coeffs.iter().zip(terms) {
        Zip::from(&mut out).and(*t).for_each(|o, &x| *o += x * c);
    }
    out
}

/// Odd part `U` and even part `V` of the degree-`2k+1` numerator for small degrees.
fn pade_low(a: &Array2<Complex64>, b: &[f64]) -> (Array2<Complex64>, Array2<Complex64>) {
    let n = a.nrows();
    let eye = identity(n);
    let mut powers = vec![eye];
    let a2 = a.dot(a);
    for _ in 1..b.len() / 2 {
        let next = powers.last().unwrap().dot(&a2);
        powers.push(next);
    }
    let refs: Vec<&Array2<Complex64>> = powers.iter().collect();
    let odd: Vec<f64> = b.iter().skip(1).step_by(2).copied().collect();
    let even: Vec<f64> = b.iter().step_by(2).copied().collect();
    let u = a.dot(&combine(&odd, &refs));
    let v = combine(&even, &refs);
    (u, v)
}

fn pade13(a: &Array2<Complex64>) -> (Array2<Complex64>, Array2<Complex64>) {
    let b = &B13;
    let eye = identity(a.nrows());
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let inner_u = combine(&[b[13], b[11], b[9]], &[&a6, &a4, &a2]);
    let u = a.dot(&(a6.dot(&inner_u) + combine(&[b[7], b[5], b[3], b[1]], &[&a6, &a4, &a2, &eye])));
    let inner_v = combine(&[b[12], b[10], b[8]], &[&a6, &a4, &a2]);
    let v = a6.dot(&inner_v) + combine(&[b[6], b[4], b[2], b[0]], &[&a6, &a4, &a2, &eye]);
    (u, v)
}

fn swap_rows(a: &mut Array2<Complex64>, x: usize, y: usize) {
    let (mut first, mut second) = a.multi_slice_mut((s![x, ..], s![y, ..]));
    Zip::from(&mut first).and(&mut second).for_each(std::mem::swap);
}

/// Solves `lhs * X = rhs` by LU factorization with partial pivoting.
fn solve(mut lhs: Array2<Complex64>, mut rhs: Array2<Complex64>) -> Array2<Complex64> {
    let n = lhs.nrows();
    let zero = Complex64::new(0.0, 0.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| lhs[[x, col]].norm().total_cmp(&lhs[[y, col]].norm()))
            .unwrap();
        if pivot_row != col {
            swap_rows(&mut lhs, col, pivot_row);
            swap_rows(&mut rhs, col, pivot_row);
        }
        let pivot = lhs[[col, col]];
        let lhs_pivot = lhs.slice(s![col, col..]).to_owned();
        let rhs_pivot = rhs.row(col).to_owned();
        for row in col + 1..n {
            let factor = lhs[[row, col]] / pivot;
            if factor == zero {
                continue;
            }
            lhs.slice_mut(s![row, col..]).scaled_add(-factor, &lhs_pivot);
            rhs.row_mut(row).scaled_add(-factor, &rhs_pivot);
        }
    }
    for col in (0..n).rev() {
        let pivot = lhs[[col, col]];
        rhs.row_mut(col).mapv_inplace(|z| z / pivot);
        let solved = rhs.row(col).to_owned();
        for row in 0..col {
            let factor = lhs[[row, col]];
            if factor != zero {
                rhs.row_mut(row).scaled_add(-factor, &solved);
            }
        }
    }
    rhs
}

/// `exp(a)` for a general complex square matrix.
pub(crate) fn expm(a: &Array2<Complex64>) -> Array2<Complex64> {
    let n = a.nrows();
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    let norm = one_norm(a);
    let (scaled, squarings) = if norm <= THETA_9 {
        (a.clone(), 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        (a.mapv(|z| z * 2f64.powi(-s)), s)
    };
    let (u, v) = if norm <= THETA_3 {
        pade_low(&scaled, &B3)
    } else if norm <= THETA_5 {
        pade_low(&scaled, &B5)
    } else if norm <= THETA_7 {
        pade_low(&scaled, &B7)
    } else if norm <= THETA_9 {
        pade_low(&scaled, &B9)
    } else {
        pade13(&scaled)
    };
    let mut result = solve(&v - &u, &v + &u);
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

pub(crate) fn unitarity_residual(s: &Array2<Complex64>) -> f64 {
    let adjoint = s.t().mapv(|z| z.conj());
    let product = adjoint.dot(s);
    product
        .indexed_iter()
        .map(|((a, b), z)| {
            let delta = if a == b { 1.0 } else { 0.0 };
            (z - delta).norm()
        })
        .fold(0.0, f64::max)
}

/// `exp(jG)`, rejected when the result misses unitarity by more than
/// [`RESIDUAL_LIMIT`].
pub fn exponentiate(g: &GeneratorMatrix) -> Result<TransitionMatrix> {
    let j = Complex64::new(0.0, 1.0);
    let s = expm(&g.entries().mapv(|z| z * j));
    let residual = unitarity_residual(&s);
    if residual.is_nan() || residual > RESIDUAL_LIMIT {
        return Err(Error::Convergence { residual });
    }
    Ok(TransitionMatrix::from_entries(s))
}
