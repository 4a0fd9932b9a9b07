pub mod analysis;
pub mod dpg;
pub mod elements;
pub mod feast;
pub mod mesh;
pub mod sparse;
