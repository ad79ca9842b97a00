//! Core of the Joliet toolchain: a small Jolie dialect with tree-valued
//! variables, dynamic aliases and an arrow `foreach`.
//!
//! The pipeline is [`parse_program`] → [`desugar`] → [`run`], plus a hover
//! documentation engine in [`docengine`] and the request handlers shared by
//! the CLI and HTTP front ends in [`service`].

pub mod docengine;
pub mod interp;
pub mod service;
pub mod syntax;
pub mod transform;
pub mod valuetree;

pub use docengine::{hover, render_html, Category, DocDatabase, HoverResult};
pub use interp::{run, Execution, FaultKind, RunFailure, RuntimeFault};
pub use service::{Endpoint, Reply, Service, ServiceError};
pub use syntax::{parse_program, pretty_print, tokenize, ParseError, Program};
pub use transform::desugar;
pub use valuetree::{Scalar, Store};
