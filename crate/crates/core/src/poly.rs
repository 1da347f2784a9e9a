//! Sparse multivariate polynomials keyed by exponent vectors.

use std::collections::BTreeMap;

use crate::scalar::{binomial, pow, Scalar, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S> {
    vars: usize,
    terms: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> Polynomial<S> {
    pub fn zero(vars: usize) -> Self {
        Self {
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: usize, c: S) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars], c);
        p
    }

    pub fn monomial(exps: Vec<u32>, c: S) -> Self {
        let mut p = Self::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    pub fn variable(vars: usize, i: usize) -> Self {
        let mut e = vec![0; vars];
        e[i] = 1;
        Self::monomial(e, S::one())
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &S)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> S {
        self.terms.get(exps).cloned().unwrap_or_else(S::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: S) {
        assert_eq!(exps.len(), self.vars, "exponent vector length");
        if c.is_negligible() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = v.clone() + c;
                if v.is_negligible() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.vars, other.vars);
        let mut out = Self::zero(self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Multiplies every term by the monomial `x^exps`.
    pub fn shift(&self, exps: &[u32]) -> Self {
        Self {
            vars: self.vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(exps).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.vars, S::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn evaluate(&self, values: &[S]) -> S {
        assert_eq!(values.len(), self.vars);
        let mut acc = S::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in values.iter().zip(e) {
                if k > 0 {
                    t = t * pow(v, k);
                }
            }
            acc = acc + t;
        }
        acc
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Componentwise maximum exponent over all terms.
    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.vars];
        for e in self.terms.keys() {
            for (a, &b) in m.iter_mut().zip(e) {
                *a = (*a).max(b);
            }
        }
        m
    }

    /// Places the variables at positions `offset..offset+vars` of a larger ring.
    pub fn embed(&self, vars: usize, offset: usize) -> Self {
        assert!(offset + self.vars <= vars);
        let mut out = Self::zero(vars);
        for (e, c) in &self.terms {
            let mut ee = vec![0; vars];
            ee[offset..offset + self.vars].copy_from_slice(e);
            out.add_term(ee, c.clone());
        }
        out
    }

    /// Substitutes `x_j ↦ Σ_l images[j][l] y_l` into a ring with `target_vars` variables.
    pub fn substitute_linear(&self, images: &[Polynomial<S>], target_vars: usize) -> Self {
        assert_eq!(images.len(), self.vars);
        let mut out = Self::zero(target_vars);
        let mut powers: Vec<Vec<Polynomial<S>>> = images
            .iter()
            .map(|p| vec![Polynomial::constant(target_vars, S::one()), p.clone()])
            .collect();
        for (e, c) in &self.terms {
            let mut t = Polynomial::constant(target_vars, c.clone());
            for (j, &k) in e.iter().enumerate() {
                while powers[j].len() <= k as usize {
                    let next = powers[j].last().unwrap().mul(&images[j]);
                    powers[j].push(next);
                }
                if k > 0 {
                    t = t.mul(&powers[j][k as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn map_coeffs<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Polynomial<T> {
        let mut out = Polynomial::zero(self.vars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(c));
        }
        out
    }

    /// `Σ_{k ≤ n} C(n,k) shift^{n-k} x^k` applied to every term: the
    /// polynomial `P(x + shift)` where `shift` is a constant vector.
    pub fn translate(&self, shift: &[S]) -> Self {
        let mut out = Self::zero(self.vars);
        for (e, c) in &self.terms {
            let mut partial: Vec<(Vec<u32>, S)> = vec![(Vec::new(), c.clone())];
            for (j, &n) in e.iter().enumerate() {
                let mut next = Vec::new();
                for (pe, pc) in &partial {
                    for k in 0..=n {
                        let w = S::from_i64(binomial(n, k)) * pow(&shift[j], n - k);
                        let mut ne = pe.clone();
                        ne.push(k);
                        next.push((ne, pc.clone() * w));
                    }
                }
                partial = next;
            }
            for (pe, pc) in partial {
                out.add_term(pe, pc);
            }
        }
        out
    }
}

impl Polynomial<C64> {
    /// Largest coefficient difference, treating missing terms as zero.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.sub(other);
        d.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Drops terms with `|c| ≤ tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.norm() > tol);
        out
    }
}
