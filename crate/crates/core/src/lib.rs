//! Exact parametric timed model checking for timed opacity.

pub mod model;
pub mod opacity;
pub mod oracle;
pub mod poly;
pub mod rational;
pub mod symsem;
pub mod syntax;

pub use rational::Rational;
