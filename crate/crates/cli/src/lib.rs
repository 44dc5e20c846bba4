pub mod generate;
pub mod json;
pub mod run;
pub mod verify;
