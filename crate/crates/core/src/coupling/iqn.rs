//! IQN-ILS history and least-squares update.

use nalgebra::DMatrix;

use super::field::InterfaceField;
use crate::{Error, Result};

/// Residual increments V and output increments W, newest column first.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingHistory {
    v: Vec<Vec<f64>>,
    w: Vec<Vec<f64>>,
    q: usize,
    eps_qr: f64,
    last: Option<(Vec<f64>, Vec<f64>)>,
}

/// Result of one IQN-ILS update.
#[derive(Debug, Clone, PartialEq)]
pub enum IqnUpdate {
    Update { d: InterfaceField, columns: usize, filtered: usize },
    /// Every column was filtered; the caller falls back to static relaxation.
    Empty { filtered: usize },
}

impl CouplingHistory {
    pub fn new(q: usize, eps_qr: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::param("q", "history length must be at least 1"));
        }
        if !(eps_qr >= 0.0) {
            return Err(Error::param("eps_qr", "must be nonnegative"));
        }
        Ok(Self {
            v: Vec::new(),
            w: Vec::new(),
            q,
            eps_qr,
            last: None,
        })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn v(&self) -> &[Vec<f64>] {
        &self.v
    }

    pub fn w(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Forgets the previous iterate so no increment spans a load-step boundary.
    /// Stored columns are kept for reuse.
    pub fn begin_step(&mut self) {
        self.last = None;
    }

    /// Records (r, d̃) of the latest evaluation and prepends the increment
    /// against the previous one of the same load step.
    pub fn push(&mut self, d_tilde: &InterfaceField, r: &InterfaceField) -> Result<()> {
        d_tilde.check_len(r)?;
        if let Some((r_prev, dt_prev)) = &self.last {
            if r_prev.len() != r.len() {
                return Err(Error::DimensionMismatch {
                    expected: r_prev.len(),
                    got: r.len(),
                });
            }
            let dv: Vec<f64> = r.values.iter().zip(r_prev).map(|(a, b)| a - b).collect();
            let dw: Vec<f64> = d_tilde.values.iter().zip(dt_prev).map(|(a, b)| a - b).collect();
            self.v.insert(0, dv);
            self.w.insert(0, dw);
            self.v.truncate(self.q);
            self.w.truncate(self.q);
        } else if let Some(c) = self.v.first() {
            if c.len() != r.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.len(),
                    got: r.len(),
                });
            }
        }
        self.last = Some((r.values.clone(), d_tilde.values.clone()));
        Ok(())
    }

    /// Drops columns of V (and W) whose QR diagonal is small relative to the
    /// column norm, repeating until none is dropped. Returns the drop count.
    pub fn filter(&mut self) -> usize {
        let mut dropped = 0;
        loop {
            let n = self.v.first().map_or(0, Vec::len);
            let m = self.v.len();
            if m == 0 {
                return dropped;
            }
            // More columns than rows: the oldest ones are necessarily dependent.
            if m > n {
                dropped += m - n;
                self.v.truncate(n);
                self.w.truncate(n);
                continue;
            }
            let r = qr_r_diagonal(&self.v);
            let keep: Vec<bool> = r
                .iter()
                .zip(&self.v)
                .map(|(rii, col)| rii.abs() >= self.eps_qr * norm(col) && rii.abs() > 0.0)
                .collect();
            let removed = keep.iter().filter(|k| !**k).count();
            if removed == 0 {
                return dropped;
            }
            dropped += removed;
            let mut it = keep.iter();
            self.v.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            self.w.retain(|_| *it.next().unwrap());
        }
    }

    /// d = d̃ + W·c with R·c = −Qᵀ·r, after recording the newest increments
    /// and filtering.
    pub fn iqnils_update(&mut self, d_tilde: &InterfaceField, r: &InterfaceField) -> Result<IqnUpdate> {
        self.push(d_tilde, r)?;
        let filtered = self.filter();
        if self.v.is_empty() {
            return Ok(IqnUpdate::Empty { filtered });
        }
        let c = self.least_squares(&r.values)?;
        let mut d = d_tilde.values.clone();
        for (ci, wi) in c.iter().zip(&self.w) {
            for (dj, wj) in d.iter_mut().zip(wi) {
                *dj += ci * wj;
            }
        }
        Ok(IqnUpdate::Update {
            d: d.into(),
            columns: self.v.len(),
            filtered,
        })
    }

    fn least_squares(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = r.len();
        let m = self.v.len();
        let vm = DMatrix::from_fn(n, m, |i, j| self.v[j][i]);
        let qr = vm.qr();
        let (q, rr) = (qr.q(), qr.r());
        let rhs = -(q.transpose() * nalgebra::DVector::from_column_slice(r));
        let mut c = vec![0.0; m];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for j in i + 1..m {
                s -= rr[(i, j)] * c[j];
            }
            if rr[(i, i)] == 0.0 {
                return Err(Error::Singular("IQN-ILS triangular factor".into()));
            }
            c[i] = s / rr[(i, i)];
        }
        Ok(c)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn qr_r_diagonal(cols: &[Vec<f64>]) -> Vec<f64> {
    let n = cols[0].len();
    let m = cols.len();
    let vm = DMatrix::from_fn(n, m, |i, j| cols[j][i]);
    let r = vm.qr().r();
    (0..m).map(|i| r[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(v: &[f64]) -> InterfaceField {
        InterfaceField::new(v.to_vec())
    }

    fn linear(d: &[f64]) -> InterfaceField {
        f(&[0.9 * d[0] + 0.3 * d[1] + 1.0, 0.8 * d[1] + 1.0])
    }

    fn run_history(h: &mut CouplingHistory, ds: &[[f64; 2]]) -> (InterfaceField, InterfaceField) {
        let eval = |d: &[f64; 2]| {
            let dt = linear(d);
            let r = f(&[dt.values[0] - d[0], dt.values[1] - d[1]]);
            (dt, r)
        };
        let (last, rest) = ds.split_last().unwrap();
        for d in rest {
            let (dt, r) = eval(d);
            h.push(&dt, &r).unwrap();
        }
        eval(last)
    }

    #[test]
    fn exact_on_two_dimensional_linear_map() {
        let mut h = CouplingHistory::new(20, 1e-10).unwrap();
        let (dt, r) = run_history(&mut h, &[[0.0, 0.0], [0.3, 0.1], [0.2, 0.7]]);
        let IqnUpdate::Update { d, columns, .. } = h.iqnils_update(&dt, &r).unwrap() else {
            panic!("history emptied");
        };
        assert_eq!(columns, 2);
        // (I − A)⁻¹ b with A = [[0.9, 0.3], [0, 0.8]], b = (1, 1).
        assert!((d.values[0] - 25.0).abs() < 1e-12 && (d.values[1] - 5.0).abs() < 1e-12, "{d:?}");
    }

    #[test]
    fn duplicate_column_is_filtered() {
        let mut a = CouplingHistory::new(20, 0.1).unwrap();
        a.v = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.5]];
        a.w = vec![vec![0.3, 0.1, 0.0], vec![0.2, 0.2, 0.2]];
        let mut b = a.clone();
        b.v.insert(1, vec![1.0, 1e-9, 0.0]);
        b.w.insert(1, vec![5.0, 5.0, 5.0]);
        assert_eq!(b.filter(), 1);
        assert_eq!(b.v, a.v);
        assert_eq!(b.w, a.w);
    }

    #[test]
    fn empty_after_filter() {
        let mut h = CouplingHistory::new(5, 0.1).unwrap();
        h.v = vec![vec![0.0, 0.0]];
        h.w = vec![vec![1.0, 1.0]];
        let out = h.iqnils_update(&f(&[1.0, 1.0]), &f(&[0.1, 0.1])).unwrap();
        assert!(matches!(out, IqnUpdate::Empty { filtered: 1 }));
    }

    #[test]
    fn scalar_single_column_is_secant() {
        // d~ = 0.5 d + 1: secant through two iterates hits the root.
        let mut h = CouplingHistory::new(5, 0.1).unwrap();
        let (d0, d1) = (0.0, 0.1);
        let (t0, t1) = (0.5 * d0 + 1.0, 0.5 * d1 + 1.0);
        h.push(&f(&[t0]), &f(&[t0 - d0])).unwrap();
        let IqnUpdate::Update { d, .. } = h.iqnils_update(&f(&[t1]), &f(&[t1 - d1])).unwrap() else {
            panic!()
        };
        assert!((d.values[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn truncates_to_q_and_resets_between_steps() {
        let mut h = CouplingHistory::new(2, 0.0).unwrap();
        for k in 0..5 {
            let x = k as f64;
            h.push(&f(&[x * x, x]), &f(&[x, 1.0 + x * x])).unwrap();
        }
        assert_eq!(h.len(), 2);
        h.begin_step();
        h.push(&f(&[100.0, 0.0]), &f(&[0.0, 100.0])).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.v()[0], vec![1.0, 7.0]);
    }
}
