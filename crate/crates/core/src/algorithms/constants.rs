use serde::Serialize;

/// Parameters of the correlated algorithm and its analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantsBundle {
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub lambda: f64,
    pub eps: f64,
    pub eps_tilde: f64,
    pub tau: f64,
}

impl ConstantsBundle {
    /// The published constants, competitive ratio 4.9843.
    pub fn paper() -> Self {
        ConstantsBundle {
            a: 1.0326,
            b: 1.6208,
            theta: 0.0535,
            gamma: 1.0 / 4.9843,
            beta: (2.0f64 / 5.0).sqrt(),
            delta: 0.02602,
            lambda: 0.02753,
            eps: 0.00253,
            eps_tilde: 0.00469,
            tau: 0.14039,
        }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        ConstantsBundle { gamma, ..self }
    }

    /// Runs [`check_constants`](crate::certificate::check_constants) and
    /// rejects the bundle if any check fails.
    pub fn validated(self) -> crate::Result<Self> {
        let report = crate::certificate::check_constants(&self, crate::certificate::DEFAULT_GRID_STEP);
        if report.passed {
            Ok(self)
        } else {
            Err(crate::Error::Constants(report.failures().join("; ")))
        }
    }

    pub fn kappa(&self) -> f64 {
        let e = (self.beta / self.a).exp();
        e / (1.0 - self.tau * e)
    }

    pub fn big_k(&self) -> f64 {
        ((self.beta / self.a).exp() - 1.0) / self.beta
    }

    pub fn omega(&self) -> f64 {
        self.eps_tilde / (1.0 / self.big_k() + self.beta + self.eps_tilde)
    }

    pub fn ratio(&self) -> f64 {
        1.0 / self.gamma
    }

    /// φ used for easy jobs.
    pub fn phi_easy(&self) -> f64 {
        self.beta + self.delta
    }

    /// Whether `q = ν/w` lies in the closed hard band `[a, b]`.
    pub fn in_band(&self, q: f64) -> bool {
        q >= self.a && q <= self.b
    }
}

impl Default for ConstantsBundle {
    fn default() -> Self {
        Self::paper()
    }
}

/// `φ(x, y) = (eˣ + eʸ)/(e + 1)`.
pub fn correlation_factor(x: f64, y: f64) -> f64 {
    (x.exp() + y.exp()) / (std::f64::consts::E + 1.0)
}
