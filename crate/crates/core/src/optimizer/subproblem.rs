//! Convex subproblem solved at every SCA iteration.
//!
//! Variables (RSMA): shares `c`, stacked precoders (common first, then one
//! per user, each as `N` real parts followed by `N` imaginary parts), `z`,
//! `alpha`, `beta`, `omega`, `sigma_p`, `sigma_c`, followed by the
//! auxiliaries of the logarithm encodings. SDMA drops `c`, the common
//! precoder, `omega` and `sigma_c`.

use num_complex::Complex64;
use rsma_conic::{
    encode_interference_bound, encode_log_lower, AffineExpr, ConicProgram, StackedComplex,
};
use serde::{Deserialize, Serialize};

use super::config::{Mode, OptimizerConfig, SlotProblem};
use super::linearize::{LogTangent, ProductTangent, QuadOverLinTangent};
use super::state::SCAState;
use crate::error::CoreError;
use crate::model::{CommonRateShares, PrecoderSet};

/// Expansion-point entries within this distance of 0 or 1 are snapped
/// before the product constraint is linearized.
pub const PRODUCT_SNAP: f64 = 1e-6;

/// What happened to the linearized product constraint in one subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductRow {
    Enforced,
    /// Two or more expansion entries are zero, so the row reads `0 = 0`.
    Vacuous,
    /// Left out after the subproblem with it proved infeasible.
    Dropped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub mode: Mode,
    pub num_users: usize,
    pub num_antennas: usize,
    pub shares: Option<usize>,
    pub common: Option<StackedComplex>,
    pub privates: Vec<StackedComplex>,
    pub z: usize,
    pub alpha: usize,
    pub beta: usize,
    pub omega: Option<usize>,
    pub sigma_p: usize,
    pub sigma_c: Option<usize>,
    pub core_vars: usize,
}

impl Layout {
    pub fn new(mode: Mode, num_antennas: usize, num_users: usize) -> Self {
        let (n, k) = (num_antennas, num_users);
        let mut next = 0;
        let mut take = |count: usize| {
            let first = next;
            next += count;
            first
        };
        let rsma = mode == Mode::Rsma;
        let shares = rsma.then(|| take(k));
        let common = rsma.then(|| StackedComplex::new(take(2 * n), n));
        let privates = (0..k)
            .map(|_| StackedComplex::new(take(2 * n), n))
            .collect();
        let z = take(k);
        let alpha = take(k);
        let beta = take(k);
        let omega = rsma.then(|| take(k));
        let sigma_p = take(k);
        let sigma_c = rsma.then(|| take(k));
        Self {
            mode,
            num_users,
            num_antennas,
            shares,
            common,
            privates,
            z,
            alpha,
            beta,
            omega,
            sigma_p,
            sigma_c,
            core_vars: next,
        }
    }

    fn precoder_indices(&self) -> Vec<usize> {
        self.common
            .iter()
            .chain(&self.privates)
            .flat_map(|p| p.indices())
            .collect()
    }

    pub fn read_precoders(&self, x: &[f64]) -> PrecoderSet {
        PrecoderSet {
            common: match self.common {
                Some(c) => c.read(x),
                None => vec![Complex64::new(0.0, 0.0); self.num_antennas],
            },
            privates: self.privates.iter().map(|p| p.read(x)).collect(),
        }
    }

    pub fn read_shares(&self, x: &[f64]) -> CommonRateShares {
        match self.shares {
            Some(c) => CommonRateShares {
                shares: x[c..c + self.num_users].to_vec(),
            },
            None => CommonRateShares::zeros(self.num_users),
        }
    }

    fn block(&self, first: usize, x: &[f64]) -> Vec<f64> {
        x[first..first + self.num_users].to_vec()
    }

    /// Next expansion point from a subproblem solution.
    pub fn read_state(&self, problem: &SlotProblem, x: &[f64]) -> SCAState {
        let z: Vec<f64> = self
            .block(self.z, x)
            .iter()
            .map(|v| v.clamp(0.0, 1.0))
            .collect();
        let sigma_p: Vec<f64> = self
            .block(self.sigma_p, x)
            .iter()
            .map(|v| v.max(1.0))
            .collect();
        let sigma_c = match self.sigma_c {
            Some(first) => self.block(first, x).iter().map(|v| v.max(1.0)).collect(),
            None => {
                // SDMA carries no common stream; keep the definition consistent.
                let p = self.read_precoders(x);
                SCAState::from_precoders(problem, p, z.clone()).sigma_c
            }
        };
        let objective = problem.weights.iter().zip(&z).map(|(w, z)| w * z).sum();
        SCAState {
            precoders: self.read_precoders(x),
            beta: self
                .block(self.beta, x)
                .iter()
                .map(|v| v.max(0.0))
                .collect(),
            z,
            sigma_p,
            sigma_c,
            objective,
        }
    }
}

pub struct Subproblem {
    pub program: ConicProgram,
    pub layout: Layout,
    pub product_row: ProductRow,
}

fn snapped(z: &[f64]) -> Vec<f64> {
    z.iter()
        .map(|&v| {
            if v < PRODUCT_SNAP {
                0.0
            } else if v > 1.0 - PRODUCT_SNAP {
                1.0
            } else {
                v
            }
        })
        .collect()
}

fn check_state(problem: &SlotProblem, state: &SCAState) -> Result<(), CoreError> {
    let k = problem.num_users();
    let n = problem.num_antennas();
    let lens = [
        state.z.len(),
        state.beta.len(),
        state.sigma_p.len(),
        state.sigma_c.len(),
        state.precoders.privates.len(),
    ];
    if lens.iter().any(|&l| l != k)
        || state.precoders.common.len() != n
        || state.precoders.privates.iter().any(|p| p.len() != n)
    {
        return Err(CoreError::InvalidDimensions(format!(
            "state does not match a problem with N = {n}, K = {k}"
        )));
    }
    if state
        .sigma_p
        .iter()
        .chain(&state.sigma_c)
        .any(|&s| s.is_nan() || s < 1.0)
    {
        return Err(CoreError::InvalidProblem(
            "expansion sigma must be >= 1".into(),
        ));
    }
    Ok(())
}

/// Builds the convex subproblem around `state`. With `enforce_product`
/// false the linearized product constraint is left out.
pub fn assemble_subproblem(
    problem: &SlotProblem,
    state: &SCAState,
    cfg: &OptimizerConfig,
    enforce_product: bool,
) -> Result<Subproblem, CoreError> {
    check_state(problem, state)?;
    let h = &problem.channels;
    let (n, k_users) = (problem.num_antennas(), problem.num_users());
    let layout = Layout::new(cfg.mode, n, k_users);
    let big_m = cfg.big_m_for(problem);
    let power = problem.total_power;
    let gains = h.gains();
    let mut program = ConicProgram::new(layout.core_vars);

    for (k, &w) in problem.weights.iter().enumerate() {
        program.set_objective(layout.z + k, w);
    }

    for (k, &gain) in gains.iter().enumerate() {
        let hk = h.user(k);
        let cap = power * gain;
        let (z, alpha, beta, sigma_p) = (
            layout.z + k,
            layout.alpha + k,
            layout.beta + k,
            layout.sigma_p + k,
        );
        let share = layout.shares.map(|c| c + k);

        // I_k + margin - c_k - log2(1 + alpha_k) <= M z_k
        let rate_alpha = program.add_var();
        encode_log_lower(&mut program, alpha, rate_alpha)?;
        let mut shortfall = AffineExpr::constant(problem.required_rates[k] + cfg.rate_margin)
            .with_term(rate_alpha, -1.0)
            .with_term(z, -big_m);
        if let Some(c) = share {
            shortfall.add_term(c, -1.0);
        }
        program.add_le_zero(shortfall);

        // c_k + tangent(log2(1 + beta_k)) - I_k <= M (1 - z_k)
        let mut excess = LogTangent::new(state.beta[k])
            .expr(beta)
            .plus(&AffineExpr::constant(-problem.required_rates[k] - big_m))
            .with_term(z, big_m);
        if let Some(c) = share {
            excess.add_term(c, 1.0);
        }
        program.add_le_zero(excess.compacted());

        let private = QuadOverLinTangent::new(hk, &state.precoders.privates[k], state.sigma_p[k]);
        let private_expr = private.expr(layout.privates[k], sigma_p);
        program.add_le(AffineExpr::var(alpha), private_expr.clone());
        if cfg.exact_beta {
            // |h^H p_k|^2 <= beta sigma  <=>  ||(2 Re, 2 Im, beta - sigma)|| <= beta + sigma
            let (re, im) = rsma_conic::inner_product_forms(hk, layout.privates[k]);
            program.add_soc(
                AffineExpr::var(beta).with_term(sigma_p, 1.0),
                vec![
                    re.scaled(2.0),
                    im.scaled(2.0),
                    AffineExpr::var(beta).with_term(sigma_p, -1.0),
                ],
            );
        } else {
            program.add_le(private_expr, AffineExpr::var(beta));
        }
        program.add_lower_bound(beta, 0.0);
        program.add_upper_bound(beta, cap);

        let interferers: Vec<StackedComplex> = layout
            .privates
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, p)| *p)
            .collect();
        encode_interference_bound(&mut program, hk, &interferers, sigma_p)?;
        program.add_upper_bound(sigma_p, 1.0 + cap);

        if let (Some(omega), Some(sigma_c), Some(common), Some(shares)) =
            (layout.omega, layout.sigma_c, layout.common, layout.shares)
        {
            let (omega, sigma_c) = (omega + k, sigma_c + k);
            // sum_j c_j <= log2(1 + omega_k) + M z_k
            let rate_omega = program.add_var();
            encode_log_lower(&mut program, omega, rate_omega)?;
            let mut total = AffineExpr::term(rate_omega, -1.0).with_term(z, -big_m);
            for j in 0..k_users {
                total.add_term(shares + j, 1.0);
            }
            program.add_le_zero(total);

            let common_tangent =
                QuadOverLinTangent::new(hk, &state.precoders.common, state.sigma_c[k]);
            program.add_le(AffineExpr::var(omega), common_tangent.expr(common, sigma_c));

            encode_interference_bound(&mut program, hk, &layout.privates, sigma_c)?;
            program.add_upper_bound(sigma_c, 1.0 + cap);
        }

        program.add_lower_bound(z, 0.0);
        program.add_upper_bound(z, 1.0);
        if let Some(c) = share {
            program.add_lower_bound(c, 0.0);
        }
    }

    let product_row = if enforce_product {
        let tangent = ProductTangent::new(&snapped(&state.z));
        if tangent.zero_count() >= 2 {
            ProductRow::Vacuous
        } else {
            let coeffs = tangent.coefficients();
            let scale = coeffs.iter().copied().fold(0.0, f64::max);
            let rhs = (k_users as f64 - 1.0) * ProductTangent::exact(&tangent.point);
            let mut row = AffineExpr::constant(-rhs / scale);
            for (k, c) in coeffs.iter().enumerate() {
                if *c != 0.0 {
                    row.add_term(layout.z + k, c / scale);
                }
            }
            program.add_eq_zero(row);
            ProductRow::Enforced
        }
    } else {
        ProductRow::Dropped
    };

    let radius = AffineExpr::constant(power.sqrt());
    let entries = layout
        .precoder_indices()
        .into_iter()
        .map(AffineExpr::var)
        .collect();
    program.add_soc(radius, entries);

    program.validate()?;
    Ok(Subproblem {
        program,
        layout,
        product_row,
    })
}
