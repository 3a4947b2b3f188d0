//! Strongly coupled load step: predictor plus accelerated fixed-point loop.

use serde::{Deserialize, Serialize};

use super::field::{aitken_omega, converged, residual, static_relax, InterfaceField};
use super::iqn::{CouplingHistory, IqnUpdate};
use crate::{Error, Result};

/// Acceleration used after the warm-up iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    IqnIls,
    Aitken,
    Static,
    GaussSeidel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingConfig {
    pub scheme: Scheme,
    /// Static relaxation parameter ω.
    pub omega: f64,
    /// Maximum retained IQN-ILS columns.
    pub q: usize,
    /// QR filter tolerance, relative to the column norm.
    pub eps_qr: f64,
    /// Relative interface convergence tolerance.
    pub eps0: f64,
    /// Evaluation cap per load step.
    pub k_max: usize,
    /// Forced static-relaxation iterations at t = 1.
    pub warmup_static_iters: usize,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::IqnIls,
            omega: 0.1,
            q: 20,
            eps_qr: 0.1,
            eps0: 1e-3,
            k_max: 100,
            warmup_static_iters: 5,
        }
    }
}

impl CouplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega <= 1.0) {
            return Err(Error::param("coupling.omega", "must lie in (0, 1]"));
        }
        if !(self.eps0 > 0.0) {
            return Err(Error::param("coupling.eps0", "must be positive"));
        }
        if self.q == 0 {
            return Err(Error::param("coupling.q", "must be at least 1"));
        }
        if !(self.eps_qr >= 0.0) {
            return Err(Error::param("coupling.eps_qr", "must be nonnegative"));
        }
        if self.k_max == 0 {
            return Err(Error::param("coupling.k_max", "must be at least 1"));
        }
        Ok(())
    }

    pub fn history(&self) -> Result<CouplingHistory> {
        CouplingHistory::new(self.q, self.eps_qr)
    }
}

/// How the iterate of a coupling iteration was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Update {
    Predictor,
    GaussSeidel,
    Static,
    Aitken,
    IqnIls,
    /// Halfway back to the last iterate the map accepted.
    Backtrack,
}

impl Update {
    pub fn label(self) -> &'static str {
        match self {
            Update::Predictor => "predictor",
            Update::GaussSeidel => "gauss-seidel",
            Update::Static => "static",
            Update::Aitken => "aitken",
            Update::IqnIls => "iqn-ils",
            Update::Backtrack => "backtrack",
        }
    }
}

/// One row of the coupling log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub t: usize,
    pub k: usize,
    pub update: Update,
    pub residual_norm: f64,
    pub rel_norm: f64,
    /// Relaxation factor for static and Aitken updates.
    pub omega: Option<f64>,
    /// Retained and filtered IQN-ILS columns.
    pub columns: Option<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub d: InterfaceField,
    /// Output of the last evaluation, d̃ at convergence.
    pub d_tilde: InterfaceField,
    /// Number of field evaluations.
    pub iterations: usize,
    pub log: Vec<IterationLog>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("coupling at load step {t} failed after {iterations} evaluations: {source}")]
pub struct CouplingError {
    pub t: usize,
    pub iterations: usize,
    pub source: Error,
    pub log: Vec<IterationLog>,
}

/// Initial iterate of load step `t` from the last converged steps
/// (most recent last).
pub fn predictor(previous: &[InterfaceField], t: usize, n: usize) -> InterfaceField {
    match previous {
        _ if t == 0 => InterfaceField::zeros(n),
        [] => InterfaceField::zeros(n),
        [last] => last.clone(),
        [.., d2, d1] => d1.values.iter().zip(&d2.values).map(|(a, b)| 2.0 * a - b).collect::<Vec<_>>().into(),
    }
}

/// Halvings toward the last accepted iterate after the map rejects an input.
pub const MAX_HALVINGS: usize = 10;

/// Iterates d ↦ map(d) from `d0` until the interface residual converges.
///
/// Gauß-Seidel at t = 0; static relaxation at k = 1 and for the warm-up
/// iterations of t = 1; the configured scheme afterwards. When the map fails
/// on an iterate after the first, the iterate is pulled halfway back to the
/// last accepted one (at most [`MAX_HALVINGS`] times in a row). Failed
/// evaluations count as iterations.
pub fn couple_step<F>(
    mut map: F,
    d0: InterfaceField,
    config: &CouplingConfig,
    history: &mut CouplingHistory,
    t: usize,
) -> std::result::Result<StepOutcome, CouplingError>
where
    F: FnMut(&InterfaceField) -> Result<InterfaceField>,
{
    let mut log = Vec::new();
    let fail = |source: Error, k: usize, log: Vec<IterationLog>| CouplingError {
        t,
        iterations: k,
        source,
        log,
    };
    if let Err(e) = config.validate() {
        return Err(fail(e, 0, log));
    }
    history.begin_step();

    let mut d = d0;
    let mut update = Update::Predictor;
    let mut omega = None;
    let mut columns = None;
    let mut aitken: Option<(f64, InterfaceField)> = None;
    // Last input the map accepted, and halvings since.
    let mut accepted: Option<InterfaceField> = None;
    let mut halvings = 0;

    for k in 0..config.k_max {
        let d_tilde = match map(&d) {
            Ok(v) => v,
            Err(e) => {
                log.push(IterationLog {
                    t,
                    k,
                    update,
                    residual_norm: f64::NAN,
                    rel_norm: f64::NAN,
                    omega,
                    columns,
                });
                match &accepted {
                    Some(prev) if halvings < MAX_HALVINGS => {
                        log::debug!("coupling t={t} k={k}: map failed ({e}), backtracking");
                        d = prev.values.iter().zip(&d.values).map(|(a, b)| a + 0.5 * (b - a)).collect::<Vec<_>>().into();
                        halvings += 1;
                        update = Update::Backtrack;
                        omega = None;
                        columns = None;
                        continue;
                    }
                    _ => return Err(fail(e, k + 1, log)),
                }
            }
        };
        accepted = Some(d.clone());
        halvings = 0;
        let r = match residual(&d_tilde, &d) {
            Ok(r) => r,
            Err(e) => return Err(fail(e, k + 1, log)),
        };
        let rn = r.norm();
        let dn = d.norm();
        log.push(IterationLog {
            t,
            k,
            update,
            residual_norm: rn,
            rel_norm: if dn > 0.0 { rn / dn } else { rn },
            omega,
            columns,
        });
        if !r.is_finite() {
            let e = Error::NotConverged {
                what: "interface residual".into(),
                iterations: k + 1,
                residual: rn,
            };
            return Err(fail(e, k + 1, log));
        }
        if converged(&r, &d, config.eps0) {
            return Ok(StepOutcome {
                d,
                d_tilde,
                iterations: k + 1,
                log,
            });
        }
        let next = k + 1;
        let warmup = next == 1 || (t == 1 && next <= config.warmup_static_iters);
        let scheme = match config.scheme {
            _ if t == 0 => Update::GaussSeidel,
            Scheme::GaussSeidel => Update::GaussSeidel,
            Scheme::Static => Update::Static,
            _ if warmup => Update::Static,
            Scheme::Aitken => Update::Aitken,
            Scheme::IqnIls => Update::IqnIls,
        };
        omega = None;
        columns = None;
        let result = match scheme {
            Update::GaussSeidel => history.push(&d_tilde, &r).map(|_| d_tilde.clone()),
            Update::Static => {
                omega = Some(config.omega);
                aitken = Some((config.omega, r.clone()));
                history.push(&d_tilde, &r).and_then(|_| static_relax(&d_tilde, &d, config.omega))
            }
            Update::Aitken => {
                let w = match &aitken {
                    Some((w_prev, r_prev)) => match aitken_omega(*w_prev, r_prev, &r) {
                        Ok(w) => w,
                        Err(Error::Stagnation(_)) => *w_prev,
                        Err(e) => return Err(fail(e, next, log)),
                    },
                    None => config.omega,
                };
                omega = Some(w);
                aitken = Some((w, r.clone()));
                history.push(&d_tilde, &r).map(|_| {
                    d.values.iter().zip(&r.values).map(|(a, b)| a + w * b).collect::<Vec<_>>().into()
                })
            }
            Update::IqnIls => match history.iqnils_update(&d_tilde, &r) {
                Ok(IqnUpdate::Update { d, columns: c, filtered }) => {
                    columns = Some((c, filtered));
                    Ok(d)
                }
                Ok(IqnUpdate::Empty { filtered }) => {
                    columns = Some((0, filtered));
                    omega = Some(config.omega);
                    static_relax(&d_tilde, &d, config.omega)
                }
                Err(e) => Err(e),
            },
            Update::Predictor | Update::Backtrack => unreachable!("never chosen as a scheme"),
        };
        update = scheme;
        d = match result {
            Ok(v) => v,
            Err(e) => return Err(fail(e, next, log)),
        };
    }
    let last = log.last().map_or(f64::NAN, |l| l.residual_norm);
    Err(fail(
        Error::NotConverged {
            what: "interface coupling".into(),
            iterations: config.k_max,
            residual: last,
        },
        config.k_max,
        log,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(a: f64, b: f64) -> impl FnMut(&InterfaceField) -> Result<InterfaceField> {
        move |d: &InterfaceField| Ok(d.values.iter().map(|x| a * x + b).collect::<Vec<_>>().into())
    }

    #[test]
    fn predictor_cases() {
        let a = InterfaceField::new(vec![0.0]);
        let b = InterfaceField::new(vec![1.0]);
        assert_eq!(predictor(&[a.clone(), b.clone()], 0, 1), InterfaceField::zeros(1));
        assert_eq!(predictor(&[b.clone()], 3, 1), b);
        assert_eq!(predictor(&[b.clone(), b.clone()], 3, 1), b);
        assert_eq!(predictor(&[a, b], 3, 1).values, vec![2.0]);
    }

    #[test]
    fn identity_map_converges_immediately() {
        let cfg = CouplingConfig::default();
        let mut h = cfg.history().unwrap();
        let out = couple_step(|d: &InterfaceField| Ok(d.clone()), vec![0.3, -1.0].into(), &cfg, &mut h, 4).unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn gauss_seidel_contraction_count() {
        let cfg = CouplingConfig {
            scheme: Scheme::GaussSeidel,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let out = couple_step(lin(0.5, 1.0), vec![0.0].into(), &cfg, &mut h, 3).unwrap();
        let bound = (cfg.eps0.ln() / 0.5_f64.ln()).ceil() as usize;
        assert!(out.iterations <= bound + 2, "{}", out.iterations);
        assert!((out.d.values[0] - 2.0).abs() < 1e-2);
    }

    #[test]
    fn gauss_seidel_diverges_when_expansive() {
        let cfg = CouplingConfig {
            scheme: Scheme::GaussSeidel,
            k_max: 30,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let err = couple_step(lin(1.5, 1.0), vec![0.0].into(), &cfg, &mut h, 3).unwrap_err();
        let first = err.log[1].residual_norm;
        let last = err.log.last().unwrap().residual_norm;
        assert!(last > 1e3 * first);
    }

    #[test]
    fn iqnils_solves_expansive_scalar() {
        let cfg = CouplingConfig {
            eps0: 1e-12,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let out = couple_step(lin(1.5, 1.0), vec![0.0].into(), &cfg, &mut h, 3).unwrap();
        assert!(out.iterations <= 3);
        assert!((out.d.values[0] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn aitken_scheme_scalar() {
        let cfg = CouplingConfig {
            scheme: Scheme::Aitken,
            eps0: 1e-12,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let out = couple_step(lin(0.5, 1.0), vec![0.0].into(), &cfg, &mut h, 3).unwrap();
        assert_eq!(out.iterations, 3);
        assert!((out.d.values[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn warmup_at_first_step() {
        let cfg = CouplingConfig::default();
        let mut h = cfg.history().unwrap();
        let out = couple_step(lin(0.5, 1.0), vec![0.0].into(), &cfg, &mut h, 1).unwrap();
        let kinds: Vec<_> = out.log.iter().map(|l| l.update).collect();
        assert_eq!(kinds[0], Update::Predictor);
        assert!(kinds[1..].iter().take(5).all(|u| *u == Update::Static));
    }

    #[test]
    fn backtracks_when_the_map_rejects_an_iterate() {
        let cfg = CouplingConfig {
            eps0: 1e-12,
            ..CouplingConfig::default()
        };
        let mut h = cfg.history().unwrap();
        let map = |d: &InterfaceField| {
            if d.values[0] > 0.06 {
                Err(Error::OutOfRange("outside the map domain".into()))
            } else {
                Ok(vec![1.5 * d.values[0] + 1.0].into())
            }
        };
        let out = couple_step(map, vec![0.0].into(), &cfg, &mut h, 3).unwrap();
        assert!((out.d.values[0] + 2.0).abs() < 1e-10);
        assert!(out.log[1].residual_norm.is_nan());
        assert_eq!(out.log[2].update, Update::Backtrack);
        let mut h = cfg.history().unwrap();
        let always = |_: &InterfaceField| -> Result<InterfaceField> { Err(Error::Singular("no".into())) };
        let err = couple_step(always, vec![0.0].into(), &cfg, &mut h, 3).unwrap_err();
        assert_eq!(err.iterations, 1);
    }

    #[test]
    fn preload_uses_gauss_seidel() {
        let cfg = CouplingConfig::default();
        let mut h = cfg.history().unwrap();
        let out = couple_step(lin(0.1, 1.0), vec![0.0].into(), &cfg, &mut h, 0).unwrap();
        assert!(out.log[1..].iter().all(|l| l.update == Update::GaussSeidel));
    }
}
