pub mod exprlang;
pub mod jets;
pub mod linalg;
pub mod tensor;
pub mod curvature;
pub mod catalog;
pub mod classify;
pub mod audit;
pub mod report;
