#[path = "../../../core/tests/support/oracle.rs"]
pub mod oracle;
pub mod schema;
