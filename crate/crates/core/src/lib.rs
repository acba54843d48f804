//! Exact computations on horizontal slices of Okamoto's self-affine curves.

pub mod bonacci;
pub mod certificate;
pub mod dimension;
pub mod dynamics;
pub mod numeric;
pub mod slice;
pub mod thickness;
pub mod words;
