use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::JetError;

/// Monomial layout shared by every jet over the same variables and truncation order.
///
/// Monomials are stored in graded-lexicographic order: all monomials of degree 0, then
/// degree 1, and so on; within one degree the exponent vectors are sorted in descending
/// lexicographic order (so `x0^2` precedes `x0 r`, which precedes `r^2`). The monomials of
/// degree `<= d` therefore form a prefix of the layout, which is what lets a jet truncated to
/// a lower order reuse the same space.
#[derive(Debug)]
pub struct JetSpace {
    vars: Vec<String>,
    order: usize,
    exponents: Vec<Vec<u8>>,
    degree_end: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
    product_end: Vec<usize>,
    lower: Vec<Vec<u32>>,
    factorial_weight: Vec<f64>,
}

const NONE: u32 = u32::MAX;

fn cache() -> &'static Mutex<HashMap<(Vec<String>, usize), Arc<JetSpace>>> {
    static CACHE: OnceLock<Mutex<HashMap<(Vec<String>, usize), Arc<JetSpace>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn monomials_of_degree(nvars: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, left: usize, remaining: usize, out: &mut Vec<Vec<u8>>) {
        if remaining == 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(prefix, left - e, remaining - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(&mut Vec::with_capacity(nvars), degree, nvars, &mut out);
    out
}

impl JetSpace {
    /// Returns the shared space for `vars` truncated at total degree `order`.
    ///
    /// Spaces are cached process-wide; building the product table is the expensive part.
    pub fn new<S: AsRef<str>>(vars: &[S], order: usize) -> Result<Arc<JetSpace>, JetError> {
        if order < 1 {
            return Err(JetError::InvalidSpace("order must be at least 1".into()));
        }
        let names: Vec<String> = vars.iter().map(|v| v.as_ref().to_string()).collect();
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(JetError::InvalidSpace(format!("duplicate variable `{a}`")));
            }
        }
        if names.len() > 16 {
            return Err(JetError::InvalidSpace("at most 16 variables are supported".into()));
        }
        let key = (names.clone(), order);
        if let Some(space) = cache().lock().expect("jet space cache poisoned").get(&key) {
            return Ok(space.clone());
        }
        let space = Arc::new(Self::build(names, order));
        cache().lock().expect("jet space cache poisoned").entry(key).or_insert(space.clone());
        Ok(space)
    }

    fn build(vars: Vec<String>, order: usize) -> JetSpace {
        let nvars = vars.len();
        let mut exponents = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            exponents.extend(monomials_of_degree(nvars, d));
            degree_end.push(exponents.len());
        }
        let index: HashMap<Vec<u8>, usize> = exponents.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        let degree = |m: &[u8]| m.iter().map(|&e| e as usize).sum::<usize>();

        let mut products = Vec::new();
        let mut sum = vec![0u8; nvars];
        for (i, ei) in exponents.iter().enumerate() {
            let di = degree(ei);
            for (j, ej) in exponents[..degree_end[order - di]].iter().enumerate() {
                for v in 0..nvars {
                    sum[v] = ei[v] + ej[v];
                }
                let k = index[&sum];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        products.sort_by_key(|&(i, j, k)| (k, i, j));
        let mut product_end = vec![0; order + 1];
        for (d, end) in product_end.iter_mut().enumerate() {
            *end = products.partition_point(|&(_, _, k)| (k as usize) < degree_end[d]);
        }

        let mut lower = vec![vec![NONE; exponents.len()]; nvars];
        for (m, e) in exponents.iter().enumerate() {
            for v in 0..nvars {
                if e[v] > 0 {
                    let mut down = e.clone();
                    down[v] -= 1;
                    lower[v][m] = index[&down] as u32;
                }
            }
        }
        let factorial_weight = exponents.iter().map(|e| e.iter().map(|&k| factorial(k as usize)).product()).collect();

        JetSpace { vars, order, exponents, degree_end, index, products, product_end, lower, factorial_weight }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Number of monomials with total degree `<= order`.
    pub fn len_for_order(&self, order: usize) -> usize {
        self.degree_end[order.min(self.order)]
    }

    pub fn exponents(&self, m: usize) -> &[u8] {
        &self.exponents[m]
    }

    pub fn monomial_index(&self, exponents: &[u8]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    pub(crate) fn products(&self, order: usize) -> &[(u32, u32, u32)] {
        &self.products[..self.product_end[order]]
    }

    pub(crate) fn lowered(&self, var: usize, m: usize) -> Option<usize> {
        let k = self.lower[var][m];
        (k != NONE).then_some(k as usize)
    }

    /// `∏ kᵢ!` for monomial `m`; converts a Taylor coefficient into a partial derivative.
    pub fn factorial_weight(&self, m: usize) -> f64 {
        self.factorial_weight[m]
    }

    pub fn degree(&self, m: usize) -> usize {
        self.exponents[m].iter().map(|&e| e as usize).sum()
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn coefficient_count_matches_multi_index_count() {
        for nvars in 1..=4 {
            for order in 1..=6 {
                let vars: Vec<String> = (0..nvars).map(|i| format!("v{i}")).collect();
                let space = JetSpace::new(&vars, order).unwrap();
                assert_eq!(space.len_for_order(order), binom(nvars + order, order));
            }
        }
    }

    #[test]
    fn graded_lex_layout() {
        let space = JetSpace::new(&["s", "z"], 2).unwrap();
        let layout: Vec<&[u8]> = (0..space.len_for_order(2)).map(|m| space.exponents(m)).collect();
        assert_eq!(layout, vec![&[0, 0][..], &[1, 0], &[0, 1], &[2, 0], &[1, 1], &[0, 2]]);
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(JetSpace::new(&["z"], 0).is_err());
        assert!(JetSpace::new(&["z", "z"], 2).is_err());
    }

    #[test]
    fn spaces_are_shared() {
        let a = JetSpace::new(&["a", "b"], 3).unwrap();
        let b = JetSpace::new(&["a", "b"], 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
