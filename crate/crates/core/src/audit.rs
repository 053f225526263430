//! Seeded ensemble audits of the inequalities and identities the library
//! exposes, with margins and replayable failure artifacts.

use crate::expansional::{
    form_bound_margin, perturbed_state, relative_hamiltonian, sandwich_bounds, Perturbation,
};
use crate::geometry::{
    bkm_hessian_check, duality_pairing_check, kullback_inequality_check,
    symmetrized_entropy_identity, trace_norm_bound_check,
};
use crate::norms::{araki_norm, bkm_norm, operator_norm};
use crate::operator::{write_matrix, HermitianOperator};
use crate::sampling::{
    instance_rng, random_hermitian, random_nearby_pair, random_perturbation, random_state,
};
use crate::weight::{
    certified_constant, mixture, nearby_constant, p_nearby_margin, DensityState, NearbyCertificate,
};
use crate::{Error, Result, MAX_DIM, MAX_ORDER};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Ensemble parameters shared by every audit section.
#[derive(Debug, Clone, Copy)]
pub struct AuditConfig {
    pub seed: u64,
    pub instances: usize,
    /// Inclusive dimension range instances are drawn from.
    pub dims: (usize, usize),
    /// Tolerance for the order comparisons and the scalar-identity check;
    /// values below float precision (around 1e-15 relative) are unsatisfiable
    /// by design and report controlled failures.
    pub tol: f64,
    /// Series truncation order (carried for interface parity; the audit
    /// sections check closed forms, not truncations).
    pub order: usize,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { seed: 0, instances: 500, dims: (2, 8), tol: 1e-9, order: 20 }
    }
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::InvalidParameter {
                name: "instances",
                reason: "need at least one instance".into(),
            });
        }
        if self.dims.0 < 2 || self.dims.0 > self.dims.1 || self.dims.1 > MAX_DIM {
            return Err(Error::InvalidParameter {
                name: "dims",
                reason: format!(
                    "need 2 <= lo <= hi <= {MAX_DIM}, got {}..{}",
                    self.dims.0, self.dims.1
                ),
            });
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "tol",
                reason: format!("must be finite and positive, got {}", self.tol),
            });
        }
        if self.order > MAX_ORDER {
            return Err(Error::OrderRange { order: self.order, max: MAX_ORDER });
        }
        Ok(())
    }
}

/// Aggregate result of one audit section.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Smallest slack seen across instances; negative means some instance
    /// violated its inequality by that relative amount.
    pub worst_margin: f64,
}

/// One failing instance, with its inputs serialized for replay.
#[derive(Debug, Clone)]
pub struct AuditFailure {
    pub check: &'static str,
    pub instance: usize,
    pub detail: String,
    /// (role, matrix interchange JSON) pairs.
    pub artifacts: Vec<(String, String)>,
}

/// Full audit outcome.
#[derive(Debug, Clone)]
pub struct AuditReport {
    pub checks: Vec<CheckReport>,
    pub failures: Vec<AuditFailure>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failures == 0)
    }
}

/// Kept artifacts per section; failures beyond this are counted, not dumped.
const MAX_DUMPS: usize = 3;

struct Outcome {
    margin: f64,
    pass: bool,
    detail: String,
    artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn passing(margin: f64) -> Self {
        Self { margin, pass: true, detail: String::new(), artifacts: Vec::new() }
    }
}

fn dump(role: &str, op: &HermitianOperator) -> (String, String) {
    (role.to_string(), write_matrix(op))
}

fn dump_state(role: &str, state: &DensityState) -> (String, String) {
    dump(role, state.op())
}

/// Runs one section: a fresh generator per instance keyed by the section's
/// stream block, sequential evaluation, order-independent aggregation.
fn run_section<F>(
    cfg: &AuditConfig,
    section: u64,
    name: &'static str,
    mut body: F,
    report: &mut AuditReport,
) -> Result<()>
where
    F: FnMut(&mut ChaCha8Rng, usize) -> Result<Outcome>,
{
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for instance in 0..cfg.instances {
        let mut rng = instance_rng(cfg.seed, (section << 32) | instance as u64);
        let outcome = body(&mut rng, instance)?;
        worst = worst.min(outcome.margin);
        if !outcome.pass {
            failures += 1;
            if report.failures.iter().filter(|f| f.check == name).count() < MAX_DUMPS {
                report.failures.push(AuditFailure {
                    check: name,
                    instance,
                    detail: outcome.detail,
                    artifacts: outcome.artifacts,
                });
            }
        }
    }
    report.checks.push(CheckReport { name, instances: cfg.instances, failures, worst_margin: worst });
    Ok(())
}

fn draw_dim(rng: &mut ChaCha8Rng, cfg: &AuditConfig) -> usize {
    rng.random_range(cfg.dims.0..=cfg.dims.1)
}

/// Runs every audit section at the given configuration.
pub fn run_audit(cfg: &AuditConfig) -> Result<AuditReport> {
    cfg.validate()?;
    let mut report = AuditReport { checks: Vec::new(), failures: Vec::new() };

    // exp(-M) rho <= rho_X <= exp(M) rho for conjugation norm M <= 3.
    run_section(cfg, 0, "sandwich", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let target = 3.0 * rng.random::<f64>();
        let x = random_perturbation(rng, rho.weight(), target)?;
        let pert = Perturbation::new(rho.weight().clone(), x.clone())?;
        let out = sandwich_bounds(&pert, cfg.tol)?;
        let margin = out.lower_margin.min(out.upper_margin);
        if out.holds {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!(
                    "lower_margin {:.6e}, upper_margin {:.6e}, tol {:.6e}",
                    out.lower_margin, out.upper_margin, cfg.tol
                ),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x)],
            })
        }
    }, &mut report)?;

    // ||log rho - log sigma|| <= log C* + tol on certified nearby pairs.
    run_section(cfg, 1, "hamiltonian_bound", |rng, _| {
        let n = draw_dim(rng, cfg);
        let (rho, sigma, _) = random_nearby_pair(rng, n, 1.0)?;
        let c_star = nearby_constant(&rho, &sigma)?;
        let norm = operator_norm(&relative_hamiltonian(rho.weight(), sigma.weight())?)?;
        let margin = c_star.ln() + cfg.tol - norm;
        if margin >= 0.0 {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("|X| {:.12e} vs log C* {:.12e}", norm, c_star.ln()),
                artifacts: vec![dump_state("rho", &rho), dump_state("sigma", &sigma)],
            })
        }
    }, &mut report)?;

    // (log C) I + p H -+ X >= 0 with the minimal constant, p in {0, 1/4, 1/2}.
    run_section(cfg, 2, "form_bound", |rng, instance| {
        let n = draw_dim(rng, cfg);
        let (rho, sigma, _) = random_nearby_pair(rng, n, 1.0)?;
        let c_star = nearby_constant(&rho, &sigma)?;
        let constant = certified_constant(c_star);
        let mut worst = f64::INFINITY;
        let mut failing_p = None;
        for p in [0.0, 0.25, 0.5] {
            let cert = NearbyCertificate::new(constant, p)?;
            let margin = form_bound_margin(&rho, &sigma, &cert)?;
            if margin < worst {
                worst = margin;
                if margin < -cfg.tol {
                    failing_p = Some(p);
                }
            }
        }
        match failing_p {
            None => Ok(Outcome::passing(worst)),
            Some(p) => Ok(Outcome {
                margin: worst,
                pass: false,
                detail: format!(
                    "instance {instance}: margin {worst:.6e} at p {p}, constant {constant:.12e}"
                ),
                artifacts: vec![dump_state("rho", &rho), dump_state("sigma", &sigma)],
            }),
        }
    }, &mut report)?;

    // Tr(X lower(Y)) against the direct metric pairing.
    run_section(cfg, 3, "duality_pairing", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let x = random_hermitian(rng, n, 1.0)?;
        let y = random_hermitian(rng, n, 1.0)?;
        let pair = duality_pairing_check(&rho, &x, &y)?;
        let err = (pair.direct - pair.mixed).abs();
        let margin = 1e-12 * pair.direct.abs().max(1.0) - err;
        if margin >= 0.0 {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("direct {:.12e} vs mixed {:.12e}", pair.direct, pair.mixed),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x), dump("y", &y)],
            })
        }
    }, &mut report)?;

    // Finite-difference entropy Hessian against the closed-form metric.
    run_section(cfg, 4, "hessian_fd", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let x = random_perturbation(rng, rho.weight(), 0.5)?;
        let h = 1e-3;
        let out = bkm_hessian_check(&rho, &x, h)?;
        let err = (out.fd_value - out.closed_form).abs();
        let discretization = 2.0 * (4.0 / 3.0) * (out.fd_value - out.fd_half).abs();
        // The entropy samples carry absolute rounding error near machine
        // epsilon; divided by h^2 that floors the achievable agreement, and
        // the relative cap cannot bind below that floor.
        let noise = 50.0 * f64::EPSILON / (h * h);
        let cap = (1e-4 * out.closed_form.abs()).max(noise);
        let allow = discretization.max(noise).min(cap);
        let margin = allow - err;
        if err <= allow {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!(
                    "fd {:.12e}, closed {:.12e}, allowed {:.6e}",
                    out.fd_value, out.closed_form, allow
                ),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x)],
            })
        }
    }, &mut report)?;

    // ||rho - sigma||_1 <= ||X|| for perturbed states.
    run_section(cfg, 5, "trace_norm_bound", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let target = 2.0 * rng.random::<f64>();
        let x = random_perturbation(rng, rho.weight(), target)?;
        let pert = Perturbation::new(rho.weight().clone(), x.clone())?;
        let out = trace_norm_bound_check(&rho, &pert)?;
        let margin = out.rhs + 1e-10 - out.lhs;
        if out.holds {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("lhs {:.12e} vs rhs {:.12e}", out.lhs, out.rhs),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x)],
            })
        }
    }, &mut report)?;

    // ||rho - sigma||_1^2 <= S(rho|sigma) + S(sigma|rho).
    run_section(cfg, 6, "kullback", |rng, _| {
        let n = draw_dim(rng, cfg);
        let (rho, sigma, _) = random_nearby_pair(rng, n, 1.5)?;
        let out = kullback_inequality_check(&rho, &sigma)?;
        let margin = out.rhs + 1e-10 - out.lhs;
        if out.holds {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("lhs {:.12e} vs rhs {:.12e}", out.lhs, out.rhs),
                artifacts: vec![dump_state("rho", &rho), dump_state("sigma", &sigma)],
            })
        }
    }, &mut report)?;

    // S(rho|sigma) + S(sigma|rho) = Tr((rho - sigma) X), to tol relative.
    run_section(cfg, 7, "symmetrized_identity", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let target = 1.5 * rng.random::<f64>();
        let x = random_perturbation(rng, rho.weight(), target)?;
        let pert = Perturbation::new(rho.weight().clone(), x.clone())?;
        let (lhs, rhs) = symmetrized_entropy_identity(&rho, &pert)?;
        let err = (lhs - rhs).abs();
        let margin = cfg.tol * lhs.abs().max(1.0) - err;
        if margin >= 0.0 {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("lhs {lhs:.12e} vs rhs {rhs:.12e}"),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x)],
            })
        }
    }, &mut report)?;

    // Mixtures of states sharing a (C, p) certificate keep the certificate.
    run_section(cfg, 8, "mixture_closure", |rng, instance| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let perturbed = |rng: &mut ChaCha8Rng| -> Result<(DensityState, f64)> {
            let target = 0.1 + 0.9 * rng.random::<f64>();
            let x = random_perturbation(rng, rho.weight(), target)?;
            let m = araki_norm(&x, rho.weight())?;
            let pert = Perturbation::new(rho.weight().clone(), x)?;
            Ok((perturbed_state(&pert)?.0, m))
        };
        let (sigma1, m1) = perturbed(rng)?;
        let (sigma2, m2) = perturbed(rng)?;
        let constant = (2.0 * m1.max(m2)).exp() * (1.0 + 1e-9);
        let p = [0.0, 0.25, 0.5][instance % 3];
        let cert = NearbyCertificate::new(constant, p)?;
        let mut worst = f64::INFINITY;
        let mut failing = None;
        for step in 1..=9 {
            let lambda = step as f64 / 10.0;
            let blended = mixture(lambda, &sigma1, &sigma2)?;
            let margin = p_nearby_margin(&rho, &blended, &cert)?;
            if margin < worst {
                worst = margin;
                if margin < -cfg.tol {
                    failing = Some((lambda, blended.clone()));
                }
            }
        }
        match failing {
            None => Ok(Outcome::passing(worst)),
            Some((lambda, blended)) => Ok(Outcome {
                margin: worst,
                pass: false,
                detail: format!(
                    "margin {worst:.6e} at lambda {lambda}, p {p}, constant {constant:.12e}"
                ),
                artifacts: vec![dump_state("rho", &rho), dump_state("sigma", &blended)],
            }),
        }
    }, &mut report)?;

    // ||X|| <= ||X||_A and ||X||_M <= ||X||_A over a unit-trace base.
    run_section(cfg, 9, "norm_chain", |rng, _| {
        let n = draw_dim(rng, cfg);
        let rho = random_state(rng, n)?;
        let x = random_hermitian(rng, n, 1.0)?;
        let araki = araki_norm(&x, rho.weight())?;
        let op = operator_norm(&x)?;
        let bkm = bkm_norm(&x, &rho)?;
        let slack = 1e-12 * araki.max(1.0);
        let margin = (araki - op).min(araki - bkm);
        if margin >= -slack {
            Ok(Outcome::passing(margin))
        } else {
            Ok(Outcome {
                margin,
                pass: false,
                detail: format!("op {op:.12e}, bkm {bkm:.12e}, araki {araki:.12e}"),
                artifacts: vec![dump_state("rho", &rho), dump("x", &x)],
            })
        }
    }, &mut report)?;

    Ok(report)
}
