//! Secret key rates for four-state continuous-variable QKD with photon
//! subtraction and a state-discrimination receiver.
//!
//! The library is organised bottom-up: [`constellation`] and [`subtraction`]
//! produce two-mode covariance matrices, [`channel`] propagates them through
//! a lossy noisy link, [`keyrate`] turns them into asymptotic, finite-size and
//! composable rates, [`discrimination`] supplies the receiver improvement
//! ratio, and [`sweep`] drives parameter scans and figure datasets.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod constellation;
pub mod discrimination;
pub mod error;
pub mod keyrate;
pub mod numerics;
pub mod subtraction;
pub mod sweep;

pub use channel::{ChannelModel, DetectorModel, NoiseBudget};
pub use constellation::{ConstellationParams, TwoModeCovariance};
pub use discrimination::{DiscriminationConfig, DiscriminationResult};
pub use error::{Error, Result};
pub use keyrate::{KeyRateResult, ProtocolParams, Regime, Scenario};
pub use subtraction::{SubtractionCorrelation, SubtractionParams};
