pub mod setcore;
pub mod construction;
pub mod valuation;
pub mod protocol;
pub mod infotheory;
pub mod lab;
