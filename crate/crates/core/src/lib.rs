pub mod exprfn;
pub mod hypersurface;
pub mod numerics;
pub mod potential;
pub mod reconstruct;
pub mod rotsym;
pub mod tensorlab;
