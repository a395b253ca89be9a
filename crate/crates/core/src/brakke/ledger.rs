use crate::kernels::KernelNorms;
use crate::table::{number, Table};
use crate::{Error, Result};

/// Default lower limit for an admissible `gamma`.
pub const DEFAULT_GAMMA_FLOOR: f64 = 1e-6;

/// The hypothesis that determines `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaBound {
    /// `gamma <= (8 (1 + C0^(2/d)))^-1`.
    Ahlfors,
    /// `gamma <= 1 / lambda_max`.
    Curvature,
    /// `beta >= gamma 2^(3d) C0^2 (lip xi + 1)`.
    Kernel,
    /// `beta > gamma C0^2 2^(3d+1) lip xi`, used with a factor 1/2.
    Strict,
}

impl GammaBound {
    pub fn name(self) -> &'static str {
        match self {
            GammaBound::Ahlfors => "ahlfors",
            GammaBound::Curvature => "curvature",
            GammaBound::Kernel => "kernel",
            GammaBound::Strict => "strict",
        }
    }
}

/// Admissible `gamma` with the four upper bounds it was chosen from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaChoice {
    pub gamma: f64,
    /// `[ahlfors, curvature, kernel, strict]`; the strict bound is listed
    /// before halving.
    pub bounds: [f64; 4],
    pub binding: GammaBound,
}

/// Largest convenient `gamma` satisfying all hypotheses: the minimum of the
/// Ahlfors, curvature and kernel bounds and half the strict bound (so that
/// `c9 > 0` with margin).
pub fn gamma_feasible(
    c0: f64,
    lambda_max: f64,
    beta: f64,
    lip_xi: f64,
    d: usize,
    floor: f64,
) -> Result<GammaChoice> {
    for (what, v) in [("C0", c0), ("lambda_max", lambda_max), ("beta", beta), ("lip xi", lip_xi)] {
        if !(v > 0.0) {
            return Err(Error::InvalidArgument(format!("{what} = {v} must be positive")));
        }
    }
    let d = d as i32;
    let p3d = 2f64.powi(3 * d);
    let bounds = [
        1.0 / (8.0 * (1.0 + c0.powf(2.0 / d as f64))),
        1.0 / lambda_max,
        beta / (p3d * c0 * c0 * (lip_xi + 1.0)),
        beta / (c0 * c0 * 2.0 * p3d * lip_xi),
    ];
    let candidates = [
        (bounds[0], GammaBound::Ahlfors),
        (bounds[1], GammaBound::Curvature),
        (bounds[2], GammaBound::Kernel),
        (0.5 * bounds[3], GammaBound::Strict),
    ];
    let (gamma, binding) = candidates
        .into_iter()
        .fold((f64::INFINITY, GammaBound::Ahlfors), |best, c| if c.0 < best.0 { c } else { best });
    if !(gamma >= floor) {
        return Err(Error::GammaInfeasible { gamma, floor });
    }
    Ok(GammaChoice {
        gamma,
        bounds,
        binding,
    })
}

/// Inputs of the constants ledger.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerInputs {
    pub d: usize,
    /// Ahlfors regularity constant.
    pub c0: f64,
    /// Consistency constant of `|H - H_eps| <= C1 eps`.
    pub c1: f64,
    /// Lipschitz constant of the tangent plane map.
    pub c2: f64,
    pub gamma: f64,
    pub beta: f64,
    pub lambda_max: f64,
    /// `||M(0)||(R^n)`.
    pub mass0: f64,
    /// Final time `T`.
    pub t_final: f64,
    pub kernel: KernelNorms,
    /// `||phi||_{C^1}` of the test function.
    pub phi_c1: f64,
}

/// The constants `c3..c10`, `C` and `C'` of the residual bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantsLedger {
    pub inputs: LedgerInputs,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
    pub c7: f64,
    pub c8: f64,
    pub c9: f64,
    pub c10: f64,
    pub big_c: f64,
    pub big_c_prime: f64,
}

/// Evaluates every constant from its closed form.
pub fn constants_ledger(inputs: LedgerInputs) -> Result<ConstantsLedger> {
    let LedgerInputs {
        d,
        c0,
        c1,
        c2,
        gamma,
        beta,
        lambda_max,
        mass0,
        t_final,
        kernel,
        phi_c1,
    } = inputs;
    if !(c0 > 1.0) {
        return Err(Error::InvalidArgument(format!("C0 = {c0} must exceed 1")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("beta = {beta} must be positive")));
    }
    if !(gamma > 0.0) {
        return Err(Error::GammaInfeasible { gamma, floor: 0.0 });
    }
    if d == 0 || !(lambda_max > 0.0) {
        return Err(Error::InvalidArgument("d and lambda_max must be positive".into()));
    }
    let di = d as i32;
    let p = |e: i32| 2f64.powi(e);
    let lip_xi = kernel.lip_xi();

    let c3 = c1 * mass0 * (2.0 + c1);
    let c5 = c0 * c0 * p(3 * di + 1) * kernel.d_rho / beta;
    let c6 = c5 * (1.0 + c0 * c0 * p(3 * di + 2) * kernel.d_xi / beta);
    let c4 = (2.0 / gamma * (c5 * c5 + c5) + 2.0 * c5 * c6 + c6) * mass0;
    let c7 = beta / c0 * p(-2 * di - 1);
    let c9 = beta - gamma * c0 * c0 * p(3 * di + 1) * lip_xi;
    if !(c9 > 0.0) {
        return Err(Error::GammaInfeasible { gamma, floor: 0.0 });
    }
    let c10 = kernel.d_rho * kernel.d_xi * p(2 * di) * c0 * c0 / (c7 * c9)
        + p(di) * kernel.dd_rho * (1.0 + 2.0 * c2) * c0 / c9;
    let c8 = c10 * mass0 * phi_c1 * (2.0 * c5 + 1.0);
    let big_c = c3 + c4 + c8;
    let big_c_prime = mass0 * (2.0 + c1) + big_c * t_final;
    Ok(ConstantsLedger {
        inputs,
        c3,
        c4,
        c5,
        c6,
        c7,
        c8,
        c9,
        c10,
        big_c,
        big_c_prime,
    })
}

impl ConstantsLedger {
    /// `(name, value)` for every input and output.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let i = &self.inputs;
        vec![
            ("d", i.d as f64),
            ("C0", i.c0),
            ("C1", i.c1),
            ("C2", i.c2),
            ("gamma", i.gamma),
            ("beta", i.beta),
            ("lambda_max", i.lambda_max),
            ("mass0", i.mass0),
            ("T", i.t_final),
            ("norm_d_rho", i.kernel.d_rho),
            ("norm_dd_rho", i.kernel.dd_rho),
            ("norm_d_xi", i.kernel.d_xi),
            ("phi_c1", i.phi_c1),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c5", self.c5),
            ("c6", self.c6),
            ("c7", self.c7),
            ("c8", self.c8),
            ("c9", self.c9),
            ("c10", self.c10),
            ("C", self.big_c),
            ("C_prime", self.big_c_prime),
        ]
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["name", "value"]);
        for (name, value) in self.entries() {
            t.push(vec![name.to_string(), number(value)]);
        }
        t
    }
}
