//! Finite-difference partial derivatives with one Richardson step.
//!
//! Functions report leaving their domain by returning a non-finite value.

use super::JetError;

/// Second-order central stencil for the k-th derivative: (offset, weight) pairs.
fn central_stencil(k: usize) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => panic!("central stencils are provided up to order 4"),
    }
}

fn central<F: Fn(&[f64]) -> f64>(f: &F, point: &[f64], idx: &[u8], h: f64) -> Result<f64, JetError> {
    // tensor product of one-dimensional stencils
    let stencils: Vec<&[(i32, f64)]> = idx.iter().map(|&k| central_stencil(k as usize)).collect();
    let mut counter = vec![0usize; idx.len()];
    let mut x = point.to_vec();
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for v in 0..idx.len() {
            let (off, wv) = stencils[v][counter[v]];
            x[v] = point[v] + off as f64 * h;
            w *= wv;
        }
        let fx = f(&x);
        if !fx.is_finite() {
            return Err(JetError::StencilOutOfDomain(x));
        }
        total += w * fx;
        let mut v = 0;
        loop {
            if v == idx.len() {
                let order: i32 = idx.iter().map(|&k| k as i32).sum();
                return Ok(total / h.powi(order));
            }
            counter[v] += 1;
            if counter[v] < stencils[v].len() {
                break;
            }
            counter[v] = 0;
            v += 1;
        }
    }
}

/// `∂^idx f(point)` by central differences, extrapolated once: `(4 D(h/2) − D(h)) / 3`.
///
/// Each variable may be differentiated at most four times.
pub fn fd_partial<F: Fn(&[f64]) -> f64>(f: F, point: &[f64], idx: &[u8], h: f64) -> Result<f64, JetError> {
    assert_eq!(point.len(), idx.len(), "multi-index length must match the point");
    let coarse = central(&f, point, idx, h)?;
    let fine = central(&f, point, idx, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

fn one_sided_raw<F: Fn(f64) -> f64>(f: &F, x: f64, k: usize, side: Side, h: f64) -> Result<f64, JetError> {
    let step = match side {
        Side::Plus => h,
        Side::Minus => -h,
    };
    let mut binom = 1.0;
    let mut total = 0.0;
    for j in 0..=k {
        if j > 0 {
            binom *= (k - j + 1) as f64 / j as f64;
        }
        let t = x + (j + 1) as f64 * step;
        let ft = f(t);
        if !ft.is_finite() {
            return Err(JetError::StencilOutOfDomain(vec![t]));
        }
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * binom * ft;
    }
    Ok(total / step.powi(k as i32))
}

/// One-sided limit of the k-th derivative of `f` at `x` from the given side.
///
/// The stencil samples `x ± h, …, x ± (k+1)h` only, so `f` never needs to be smooth at
/// `x` itself. One Richardson step removes the first-order error.
pub fn fd_one_sided<F: Fn(f64) -> f64>(f: F, x: f64, k: usize, side: Side, h: f64) -> Result<f64, JetError> {
    let coarse = one_sided_raw(&f, x, k, side, h)?;
    let fine = one_sided_raw(&f, x, k, side, h / 2.0)?;
    Ok(2.0 * fine - coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn second_derivative_of_square() {
        for z in [-1.3, 0.0, 2.5] {
            let d = fd_partial(|p| p[0] * p[0], &[z], &[2], 1e-3).unwrap();
            assert_abs_diff_eq!(d, 2.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn derivative_of_exp() {
        let d = fd_partial(|p| p[0].exp(), &[0.0], &[1], 1e-3).unwrap();
        assert_abs_diff_eq!(d, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn mixed_partial() {
        let f = |p: &[f64]| p[0].sin() * p[1].exp();
        let d = fd_partial(f, &[0.3, 0.2], &[1, 2], 1e-2).unwrap();
        assert_abs_diff_eq!(d, 0.3f64.cos() * 0.2f64.exp(), epsilon = 1e-7);
    }

    #[test]
    fn stencil_leaving_domain() {
        let err = fd_partial(|p| p[0].sqrt(), &[0.0], &[1], 1e-3).unwrap_err();
        assert!(matches!(err, JetError::StencilOutOfDomain(_)));
    }

    #[test]
    fn one_sided_sees_a_kink() {
        let f = |t: f64| t.abs().powi(3);
        let plus = fd_one_sided(f, 0.0, 3, Side::Plus, 1e-3).unwrap();
        let minus = fd_one_sided(f, 0.0, 3, Side::Minus, 1e-3).unwrap();
        assert_abs_diff_eq!(plus, 6.0, epsilon = 1e-6);
        assert_abs_diff_eq!(minus, -6.0, epsilon = 1e-6);
    }
}
