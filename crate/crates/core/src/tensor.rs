//! Dense storage for the curvature tensors and the cyclic-sum helper.
//!
//! Index 0 is the `y⁰` direction; spatial index `i` (1-based in formulas) is stored at `i`.

use serde::Serialize;

/// `(f)_{abc} = f(a,b,c) + f(b,c,a) + f(c,a,b)`
pub fn cyclic3(a: usize, b: usize, c: usize, f: impl Fn(usize, usize, usize) -> f64) -> f64 {
    f(a, b, c) + f(b, c, a) + f(c, a, b)
}

/// `(f)_{ab} = f(a,b) + f(b,a)`
pub fn cyclic2(a: usize, b: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    f(a, b) + f(b, a)
}

pub fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

const PERMS3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `B^A_{BCD}` over `A, B, C, D ∈ 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerwaldTensor {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl BerwaldTensor {
    pub fn zeros(dim: usize) -> BerwaldTensor {
        BerwaldTensor { dim, data: vec![0.0; dim.pow(4)] }
    }

    fn offset(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        ((a * self.dim + b) * self.dim + c) * self.dim + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[self.offset(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: f64) {
        let o = self.offset(a, b, c, d);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest change of a component under permutation of the lower indices.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    for d in 0..self.dim {
                        let idx = [b, c, d];
                        let v = self.get(a, b, c, d);
                        for p in PERMS3 {
                            worst = worst.max((v - self.get(a, idx[p[0]], idx[p[1]], idx[p[2]])).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `max |Σ_D B^A_{BCD} y^D|`
    pub fn y_contraction(&self, y: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    let s: f64 = (0..self.dim).map(|d| self.get(a, b, c, d) * y[d]).sum();
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    pub fn max_diff(&self, other: &BerwaldTensor) -> f64 {
        max_diff(&self.data, &other.data)
    }
}

/// `L_{ABC}` over `A, B, C ∈ 0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandsbergTensor {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl LandsbergTensor {
    pub fn zeros(dim: usize) -> LandsbergTensor {
        LandsbergTensor { dim, data: vec![0.0; dim.pow(3)] }
    }

    fn offset(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.dim + b) * self.dim + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.offset(a, b, c)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let o = self.offset(a, b, c);
        self.data[o] = v;
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    let idx = [a, b, c];
                    let v = self.get(a, b, c);
                    for p in PERMS3 {
                        worst = worst.max((v - self.get(idx[p[0]], idx[p[1]], idx[p[2]])).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn y_contraction(&self, y: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.dim {
            for b in 0..self.dim {
                let s: f64 = (0..self.dim).map(|c| self.get(a, b, c) * y[c]).sum();
                worst = worst.max(s.abs());
            }
        }
        worst
    }

    pub fn max_diff(&self, other: &LandsbergTensor) -> f64 {
        max_diff(&self.data, &other.data)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "tensor shapes differ");
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Splits lower indices into the zero ones and the spatial ones (order kept), as used by
/// the component families `X_000`, `X_00l`, `X_0kl`, `X_jkl`.
pub fn split_zero(idx: &[usize]) -> (usize, Vec<usize>) {
    let spatial: Vec<usize> = idx.iter().copied().filter(|&i| i != 0).collect();
    (idx.len() - spatial.len(), spatial)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_rotation() {
        let v = cyclic3(1, 2, 3, |a, b, c| (100 * a + 10 * b + c) as f64);
        assert_eq!(v, (123 + 231 + 312) as f64);
        assert_eq!(cyclic2(1, 2, |a, b| (10 * a + b) as f64), 33.0);
    }

    #[test]
    fn cyclic_delta_product_is_symmetric() {
        // (δ_ji δ_kl)_{ikl}
        let f = |i: usize, j: usize, k: usize, l: usize| cyclic3(i, k, l, |i, k, l| delta(j, i) * delta(k, l));
        for idx in [[1, 1, 2, 2], [1, 2, 1, 2], [2, 2, 2, 2], [1, 2, 3, 1]] {
            let [i, j, k, l] = idx;
            assert_eq!(f(i, j, k, l), f(i, k, j, l));
            assert_eq!(f(i, j, k, l), f(i, l, k, j));
        }
    }

    #[test]
    fn split_keeps_order() {
        assert_eq!(split_zero(&[3, 0, 1]), (1, vec![3, 1]));
        assert_eq!(split_zero(&[0, 0, 0]), (3, vec![]));
    }

    #[test]
    fn symmetry_defect_detects_asymmetry() {
        let mut t = LandsbergTensor::zeros(2);
        t.set(0, 0, 1, 1.0);
        assert_eq!(t.symmetry_defect(), 1.0);
        t.set(0, 1, 0, 1.0);
        t.set(1, 0, 0, 1.0);
        assert_eq!(t.symmetry_defect(), 0.0);
    }
}
