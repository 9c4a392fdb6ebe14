pub mod analytic;
pub mod mcsim;
pub mod scenario;
pub mod specfun;
