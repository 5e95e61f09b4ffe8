//! Lower, upper and mixed compensated convex transforms.
//!
//! The lower transform `C^l_λ(f) = co[f + λ|x−x₀|²] − λ|x−x₀|²` is computed
//! either as the proximal hull `M^λ(M_λ(f))` (Moreau schemes) or directly
//! from a convex envelope (Oberman and biconjugate schemes). The upper
//! transform is `C^u_λ(f) = −C^l_λ(−f)`.

use serde::{Deserialize, Serialize};

use crate::convex::{biconjugate_envelope_with, oberman_with, BiconjugateOptions, ObermanOptions};
use crate::error::{require_positive, Error, Result};
use crate::grid::{MaskGrid, ScalarGrid};
use crate::moreau::{iterative_moreau, lower_moreau, upper_moreau};

/// Scheme tag without options, used in reports and errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    MoreauParabola,
    MoreauIterative,
    Oberman,
    Biconjugate,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::MoreauParabola,
        SchemeKind::MoreauIterative,
        SchemeKind::Oberman,
        SchemeKind::Biconjugate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::MoreauParabola => "moreau-parabola",
            SchemeKind::MoreauIterative => "moreau-iterative",
            SchemeKind::Oberman => "oberman",
            SchemeKind::Biconjugate => "biconjugate",
        }
    }
}

/// Numerical scheme with its options.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    MoreauParabola,
    /// Local relaxation; `max_iters` defaults to the largest axis extent,
    /// which makes the result exact.
    MoreauIterative {
        max_iters: Option<usize>,
    },
    Oberman(ObermanOptions),
    Biconjugate(BiconjugateOptions),
}

impl Scheme {
    pub fn kind(&self) -> SchemeKind {
        match self {
            Scheme::MoreauParabola => SchemeKind::MoreauParabola,
            Scheme::MoreauIterative { .. } => SchemeKind::MoreauIterative,
            Scheme::Oberman(_) => SchemeKind::Oberman,
            Scheme::Biconjugate(_) => SchemeKind::Biconjugate,
        }
    }

    /// The scheme with default options.
    pub fn from_kind(kind: SchemeKind) -> Self {
        match kind {
            SchemeKind::MoreauParabola => Scheme::MoreauParabola,
            SchemeKind::MoreauIterative => Scheme::MoreauIterative { max_iters: None },
            SchemeKind::Oberman => Scheme::Oberman(ObermanOptions::default()),
            SchemeKind::Biconjugate => Scheme::Biconjugate(BiconjugateOptions::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaddingMode {
    #[default]
    None,
    Mirror,
}

/// Boundary extension applied before a transform and removed afterwards.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Padding {
    pub mode: PaddingMode,
    pub width: usize,
}

impl Padding {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn mirror(width: usize) -> Self {
        Self {
            mode: PaddingMode::Mirror,
            width,
        }
    }

    fn active_width(&self) -> usize {
        match self.mode {
            PaddingMode::None => 0,
            PaddingMode::Mirror => self.width,
        }
    }
}

/// Scale parameters and scheme selection shared by every transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub lambda: f64,
    pub tau: f64,
    pub level_m: f64,
    pub scheme: Scheme,
    pub padding: Padding,
}

impl TransformParams {
    /// Moreau-parabola scheme, `τ = λ`, `M = 1`, no padding.
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            tau: lambda,
            level_m: 1.0,
            scheme: Scheme::MoreauParabola,
            padding: Padding::none(),
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_level(mut self, level_m: f64) -> Self {
        self.level_m = level_m;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_padding(mut self, padding: Padding) -> Self {
        self.padding = padding;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("lambda", self.lambda)?;
        require_positive("tau", self.tau)?;
        require_positive("level_m", self.level_m)?;
        Ok(())
    }
}

fn padded<F>(g: &ScalarGrid, padding: &Padding, f: F) -> Result<ScalarGrid>
where
    F: FnOnce(&ScalarGrid) -> Result<ScalarGrid>,
{
    let width = padding.active_width();
    if width == 0 {
        return f(g);
    }
    f(&g.pad_mirror(width)?)?.crop(width)
}

/// `C^l_λ(g)`.
pub fn lower_transform(g: &ScalarGrid, params: &TransformParams) -> Result<ScalarGrid> {
    require_positive("lambda", params.lambda)?;
    padded(g, &params.padding, |g| {
        lower_unpadded(g, params.lambda, &params.scheme)
    })
}

/// `C^u_λ(g) = −C^l_λ(−g)`.
pub fn upper_transform(g: &ScalarGrid, params: &TransformParams) -> Result<ScalarGrid> {
    require_positive("lambda", params.lambda)?;
    padded(g, &params.padding, |g| {
        upper_unpadded(g, params.lambda, &params.scheme)
    })
}

/// `C^u_τ(C^l_λ(g))`.
pub fn mixed_ul(g: &ScalarGrid, params: &TransformParams) -> Result<ScalarGrid> {
    require_positive("lambda", params.lambda)?;
    require_positive("tau", params.tau)?;
    padded(g, &params.padding, |g| {
        let inner = lower_unpadded(g, params.lambda, &params.scheme)?;
        upper_unpadded(&inner, params.tau, &params.scheme)
    })
}

/// `C^l_λ(C^u_τ(g))`.
pub fn mixed_lu(g: &ScalarGrid, params: &TransformParams) -> Result<ScalarGrid> {
    require_positive("lambda", params.lambda)?;
    require_positive("tau", params.tau)?;
    padded(g, &params.padding, |g| {
        let inner = upper_unpadded(g, params.tau, &params.scheme)?;
        lower_unpadded(&inner, params.lambda, &params.scheme)
    })
}

/// `amplitude` on the marked cells, 0 elsewhere.
pub fn char_grid(mask: &MaskGrid, amplitude: f64) -> ScalarGrid {
    mask.to_grid(amplitude)
}

pub(crate) fn upper_unpadded(g: &ScalarGrid, lambda: f64, scheme: &Scheme) -> Result<ScalarGrid> {
    Ok(lower_unpadded(&g.neg(), lambda, scheme)?.neg())
}

pub(crate) fn lower_unpadded(g: &ScalarGrid, lambda: f64, scheme: &Scheme) -> Result<ScalarGrid> {
    let raw = match scheme {
        Scheme::MoreauParabola => upper_moreau(&lower_moreau(g, lambda)?, lambda)?,
        Scheme::MoreauIterative { max_iters } => {
            let steps = max_iters.unwrap_or_else(|| g.shape().iter().copied().max().unwrap_or(1));
            let inner = iterative_moreau(g, lambda, steps)?;
            iterative_moreau(&inner.neg(), lambda, steps)?.neg()
        }
        Scheme::Oberman(opts) => {
            let (shifted, bowl) = add_bowl(g, lambda);
            let outcome = oberman_with(&shifted, opts)?;
            if !outcome.converged {
                return Err(Error::NotConverged {
                    scheme: SchemeKind::Oberman,
                    iterations: outcome.iterations,
                    change: outcome.last_change,
                });
            }
            outcome.grid.sub(&bowl)?
        }
        Scheme::Biconjugate(opts) => {
            let (shifted, bowl) = add_bowl(g, lambda);
            biconjugate_envelope_with(&shifted, opts)?.sub(&bowl)?
        }
    };
    // the transform never exceeds g; rounding in the subtraction can
    raw.zip_map(g, f64::min)
}

/// `(g + λ|x−x₀|², λ|x−x₀|²)` with `x₀` the domain centre.
fn add_bowl(g: &ScalarGrid, lambda: f64) -> (ScalarGrid, ScalarGrid) {
    let geom = g.geometry();
    let center = geom.center();
    let bowl = ScalarGrid::from_parts(
        geom.clone(),
        (0..geom.len())
            .map(|flat| {
                let x = geom.coord(flat);
                lambda
                    * x.iter()
                        .zip(&center)
                        .map(|(a, c)| (a - c) * (a - c))
                        .sum::<f64>()
            })
            .collect(),
    );
    let shifted = ScalarGrid::from_parts(
        geom.clone(),
        g.values()
            .iter()
            .zip(bowl.values())
            .map(|(a, b)| a + b)
            .collect(),
    );
    (shifted, bowl)
}
