pub mod boundary;
pub mod cones;
pub mod deform;
pub mod domain;
pub mod error;
pub mod geom;
pub mod measure;
pub mod mesh_io;
pub mod quadrature;
pub mod report;
pub mod stability;
pub mod verify;
