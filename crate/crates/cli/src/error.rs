use sle_core::contour::ContourError;
use sle_core::euler::EulerError;
use sle_core::fomin::FominError;
use sle_core::hexagon::HexagonError;
use sle_core::holonomy::HolonomyError;
use sle_core::pairings::PairingError;
use sle_core::specialfn::SpecialFnError;
use sle_core::ust::UstError;
use sle_lattice::LatticeError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or inconsistent input.
    #[error("{0}")]
    Validation(String),
    /// The computation itself failed (no convergence, singular system, ...).
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

impl From<ContourError> for CliError {
    fn from(e: ContourError) -> Self {
        match e {
            ContourError::InvalidLoop(_) | ContourError::Dimension(_) | ContourError::NonIntegrable { .. } => validation(e),
            ContourError::NotClosed(_) | ContourError::SingularPath(_) | ContourError::IntersectingPaths(_) => numerical(e),
        }
    }
}

impl From<SpecialFnError> for CliError {
    fn from(e: SpecialFnError) -> Self {
        match e {
            SpecialFnError::Pole(_) | SpecialFnError::InvalidParameter(_) | SpecialFnError::Divergent(_) => validation(e),
            SpecialFnError::NotConverged(_) => numerical(e),
            SpecialFnError::Contour(c) => c.into(),
        }
    }
}

impl From<PairingError> for CliError {
    fn from(e: PairingError) -> Self {
        validation(e)
    }
}

impl From<FominError> for CliError {
    fn from(e: FominError) -> Self {
        validation(e)
    }
}

impl From<HolonomyError> for CliError {
    fn from(e: HolonomyError) -> Self {
        match e {
            HolonomyError::StepTooLarge { .. } | HolonomyError::BadPoints | HolonomyError::BadIndex(_) | HolonomyError::Size(_) => {
                validation(e)
            }
            HolonomyError::Evaluation(_) | HolonomyError::Overflow => numerical(e),
        }
    }
}

impl From<EulerError> for CliError {
    fn from(e: EulerError) -> Self {
        match e {
            EulerError::Contour(c) => c.into(),
            EulerError::SpecialFn(s) => s.into(),
            EulerError::Pairing(p) => p.into(),
            EulerError::Holonomy(h) => h.into(),
            _ => validation(e),
        }
    }
}

impl From<UstError> for CliError {
    fn from(e: UstError) -> Self {
        match e {
            UstError::TooFewPoints(..) | UstError::Step(_) => validation(e),
            UstError::Singular => numerical(e),
            UstError::Configuration(c) => c.into(),
            UstError::Contour(c) => c.into(),
        }
    }
}

impl From<HexagonError> for CliError {
    fn from(e: HexagonError) -> Self {
        match e {
            HexagonError::Domain(..) | HexagonError::OffArc(_) => validation(e),
            HexagonError::SpecialFn(s) => s.into(),
            HexagonError::Pairing(p) => p.into(),
        }
    }
}

impl From<LatticeError> for CliError {
    fn from(e: LatticeError) -> Self {
        match e {
            LatticeError::Inconsistent(_) | LatticeError::NotConverged(_) => numerical(e),
            _ => validation(e),
        }
    }
}
