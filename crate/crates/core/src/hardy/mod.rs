//! Hardy-space machinery: tent atoms and their stopping-time decomposition,
//! the synthesis operator `pi_{eta,beta}`, and molecular decompositions of
//! functions and of Riesz-transform 1-forms.

mod molecule;
mod synthesis;
mod tent;

pub use molecule::{
    annular_norms, check_e1_atom, check_molecule, estimate_doubling_exponent, molecular_decompose,
    molecule_constant, riesz_hardy_map, E1Certificate, E1Clause, MolecularDecomposition, MolecularOptions,
    Molecule, MoleculeCheck, MoleculeValue, TentSummary,
};
pub use synthesis::{
    default_eta, pi_synthesis, reconstruction_remainder, synthesis_coefficients, synthesis_k_max,
    synthesis_multiplier, weighted_slab_sum,
};
pub use tent::{check_tent_atom, tent_atomic_decompose, AtomCertificate, TentAtom, TentDecomposition};
