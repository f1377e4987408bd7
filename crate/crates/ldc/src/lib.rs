pub mod algebra;
pub mod check;
pub mod eval;
pub mod heap;
pub mod lnl;
pub mod oracle;
pub mod cli;
pub mod syntax;
