//! Twin-code distributed storage over prime fields.
//!
//! A message is laid out as a `k x k` matrix and stored on two families of
//! nodes, each encoding the matrix (or its transpose) with its own MDS code.
//! Any `k` nodes of one type reconstruct the message, and a failed node is
//! rebuilt from one symbol per helper of the other type.
//!
//! ```
//! use twincode::{encode_system, MessageMatrix, NodeId, NodeType, TwinConfig, GeneratorStyle};
//!
//! let config = TwinConfig::with_style(GeneratorStyle::Vandermonde, 11, 5, 6, 4)?;
//! let msg = MessageMatrix::from_payload(config.field(), &(0..11).cycle().take(16).collect::<Vec<_>>(), 4)?;
//! let mut system = encode_system(&config, &msg)?;
//!
//! system.fail(NodeId::two(2))?;
//! let outcome = system.repair(NodeId::two(2), &[1, 2, 3, 4])?;
//! assert_eq!(outcome.symbols_transferred(), 4);
//! assert_eq!(system.reconstruct(NodeType::Two, &[1, 2, 3, 4])?, msg);
//! # Ok::<(), twincode::Error>(())
//! ```

pub mod bounds;
pub mod eavesdrop;
mod error;
pub mod field;
pub mod matrix;
pub mod mds;
pub mod secure;
pub mod sim;
pub mod twin;
pub mod worked_example;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/intro.md")]
pub mod book_intro {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fields.md")]
pub mod book_fields {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/codes.md")]
pub mod book_codes {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/twin.md")]
pub mod book_twin {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/security.md")]
pub mod book_security {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod book_bounds {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scenarios.md")]
pub mod book_scenarios {}

pub use eavesdrop::{EavesdropReport, EavesdropperSpec, Observation, RepairPlan};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use matrix::FieldMatrix;
pub use mds::{GeneratorDocument, GeneratorStyle, MdsCode};
pub use secure::{LayoutDocument, SecrecyGuarantee, SecureLayout};
pub use sim::{EventLog, Scenario};
pub use twin::{
    deploy, encode_system, MessageMatrix, NodeContent, NodeId, NodeType, RepairOutcome, SystemSnapshot, TwinConfig,
    TwinSystem,
};
