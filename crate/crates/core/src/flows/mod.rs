//! Contact Hamiltonian dynamics and Legendrian approximation of paths.

pub mod hamiltonian;
pub mod path;
pub mod poly;

pub use hamiltonian::{
    contact_hamiltonian_field, flow, verify_contactomorphism, verify_infinitesimal, ContactomorphismReport, FlowResult,
    InfinitesimalReport,
};
pub use path::{legendrian_path_approx, PathReport, SampledPath};
pub use poly::{parse_poly, PolyFunction, PolyVectorField};
