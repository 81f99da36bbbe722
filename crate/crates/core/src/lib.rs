pub mod approximate;
pub mod domain;
pub mod io;
pub mod simplicial;
pub mod triangulate;
pub mod verify;
pub mod zerofree;
