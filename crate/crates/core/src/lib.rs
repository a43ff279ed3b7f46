pub mod geometry;
pub mod mesh;
pub mod sizing;
pub mod fields;
pub mod interpolation;
pub mod functionals;
pub mod study;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/sizing.md")]
    mod sizing {}
    #[doc = include_str!("../../../book/src/interpolation.md")]
    mod interpolation {}
    #[doc = include_str!("../../../book/src/functionals.md")]
    mod functionals {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
