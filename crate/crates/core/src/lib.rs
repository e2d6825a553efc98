//! Compile electronic-structure Hamiltonians into 2-local qubit Hamiltonians
//! built only from ZZ, XX and XZ couplings, and check the spectra.

pub mod encoding;
pub mod error;
pub mod fermion;
pub mod gadget;
pub mod graph;
pub mod pauli;
pub mod pipeline;
pub mod shaping;
pub mod spectra;

pub use error::{Error, Result};
pub use pauli::{Letter, PauliSum, PauliTerm, Phase};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/pauli.md")]
    mod pauli {}
    #[doc = include_str!("../../../book/src/encodings.md")]
    mod encodings {}
    #[doc = include_str!("../../../book/src/shaping.md")]
    mod shaping {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    mod gadgets {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
