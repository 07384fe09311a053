//! Bessel values against an exact rational evaluation of the power series.

use eopm::bessel::{bessel_j, bessel_row};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `sum_k (-1)^k (x/2)^(2k+q) / (k! (k+q)!)` in exact arithmetic, stopped once
/// the terms are past their peak and below 1e-40 of the leading term.
fn exact_j(q: u32, x: &BigRational) -> f64 {
    let half = x / BigInt::from(2);
    let half_sq = &half * &half;
    let mut term = BigRational::one();
    for i in 1..=q {
        term = term * &half / BigInt::from(i);
    }
    if term.is_zero() {
        return 0.0;
    }
    let floor = term.abs() * ratio(1, 10).pow(40);
    let peak = x.to_f64().unwrap() as u64;
    let mut sum = BigRational::zero();
    let mut k: u64 = 0;
    loop {
        sum += &term;
        k += 1;
        term = -term * &half_sq / BigInt::from(k * (k + q as u64));
        if k > peak && term.abs() < floor {
            break;
        }
    }
    sum.to_f64().unwrap()
}

fn arguments() -> Vec<(i64, i64)> {
    vec![(1, 10), (1, 2), (1, 1), (3, 2), (2, 1), (5, 2), (5, 1), (37, 4), (15, 1), (20, 1), (30, 1), (61, 2)]
}

const ORDERS: [u32; 12] = [0, 1, 2, 3, 5, 8, 13, 21, 34, 50, 75, 120];

#[test]
fn single_values_match_exact_series() {
    for (num, den) in arguments() {
        let x = ratio(num, den);
        let xf = num as f64 / den as f64;
        for q in ORDERS {
            let want = exact_j(q, &x);
            let got = bessel_j(q as i64, xf).unwrap();
            let err = (got - want).abs();
            assert!(
                err <= 1e-13 * want.abs() + 2e-15,
                "J_{q}({xf}): got {got:e}, exact {want:e}"
            );
        }
    }
}

#[test]
fn rows_match_exact_series() {
    for (num, den) in arguments() {
        let x = ratio(num, den);
        let xf = num as f64 / den as f64;
        let row = bessel_row(xf, 120).unwrap();
        for q in ORDERS {
            let want = exact_j(q, &x);
            let got = row.get(q as i64);
            assert!(
                (got - want).abs() <= 1e-13 * want.abs() + 2e-15,
                "row J_{q}({xf}): got {got:e}, exact {want:e}"
            );
            let odd = if q % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(row.get(-(q as i64)), odd * got);
        }
    }
}

#[test]
fn exact_first_order_at_tenth() {
    let want = exact_j(1, &ratio(1, 10));
    assert!((want - 0.049_937_526_036_242).abs() < 1e-15);
}
