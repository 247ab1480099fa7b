//! Test oracles shared by the integration tests.
#![allow(dead_code)]

use contactdyn::exterior::FormValue;

/// Dense antisymmetric tensor: every ordered index tuple is stored.
pub struct Dense {
    pub dim: usize,
    pub degree: usize,
    pub data: Vec<f64>,
}

pub fn permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            let mut inversions = 0;
            for i in 0..prefix.len() {
                for j in i + 1..prefix.len() {
                    if prefix[i] > prefix[j] {
                        inversions += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inversions % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            go(prefix, rest, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..k).collect(), &mut out);
    out
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

impl Dense {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Dense { dim, degree, data: vec![0.0; dim.pow(degree as u32)] }
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn tuples(&self, degree: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..degree {
            out = out
                .into_iter()
                .flat_map(|t| (0..self.dim).map(move |i| [t.clone(), vec![i]].concat()))
                .collect();
        }
        out
    }

    pub fn from_sparse(f: &FormValue) -> Self {
        let mut d = Dense::zero(f.dim(), f.degree());
        let perms = permutations(f.degree());
        for (idx, c) in f.components() {
            for (p, sign) in &perms {
                let permuted: Vec<usize> = p.iter().map(|&k| idx[k]).collect();
                let o = d.offset(&permuted);
                d.data[o] = sign * c;
            }
        }
        d
    }

    pub fn wedge(a: &Dense, b: &Dense) -> Dense {
        let (k, l) = (a.degree, b.degree);
        let mut out = Dense::zero(a.dim, k + l);
        let perms = permutations(k + l);
        let norm = factorial(k) * factorial(l);
        for t in out.tuples(k + l) {
            let mut acc = 0.0;
            for (p, sign) in &perms {
                let u: Vec<usize> = p.iter().map(|&m| t[m]).collect();
                acc += sign * a.get(&u[..k]) * b.get(&u[k..]);
            }
            let o = out.offset(&t);
            out.data[o] = acc / norm;
        }
        out
    }

    pub fn contract(x: &[f64], f: &Dense) -> Dense {
        let mut out = Dense::zero(f.dim, f.degree - 1);
        for t in out.tuples(f.degree - 1) {
            let acc = (0..f.dim).map(|i| x[i] * f.get(&[vec![i], t.clone()].concat())).sum();
            let o = out.offset(&t);
            out.data[o] = acc;
        }
        out
    }

    /// Largest gap to a sparse form, over every ordered tuple.
    pub fn distance(&self, f: &FormValue) -> f64 {
        let other = Dense::from_sparse(f);
        assert_eq!(self.degree, f.degree());
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

pub fn increasing(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, dim: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..dim {
            prefix.push(i);
            go(i + 1, dim, left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(0, dim, degree, &mut Vec::new(), &mut out);
    out
}
