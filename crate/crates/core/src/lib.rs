//! Euler-integral solutions of the SLE commutation system and their
//! closed-form specializations: crossing formulas, Fomin determinants,
//! hexagon crossing probabilities and hyperelliptic period determinants.

pub mod contour;
pub mod euler;
pub mod fomin;
pub mod hexagon;
pub mod holonomy;
pub mod pairings;
pub mod quad;
pub mod specialfn;
pub mod ust;



