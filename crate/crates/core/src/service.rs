//! Request handlers behind the CLI and the HTTP endpoints.
//!
//! Both front ends build the same request values and serialize results
//! through [`Service::respond`], so a CLI invocation with `--json` and the
//! equivalent HTTP request produce byte-identical bodies.

use serde::{Deserialize, Serialize};

use crate::docengine::{first_paragraph, hover, render_html, DocDatabase, DocDbError};
use crate::interp::{run, FaultKind};
use crate::syntax::{parse_program, pretty_print, tokenize, ParseError};
use crate::transform::desugar;

pub const DEFAULT_BUDGET_CAP: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HoverRequest {
    pub source: String,
    pub line: usize,
    pub col: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_paths: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HoverResponse {
    pub found: bool,
    pub word: String,
    pub category: String,
    /// First paragraph, for the small popup.
    pub snippet: String,
    /// Whole body, for the "docs" action.
    pub full_markdown: String,
    /// Rendered body, for the "online" action.
    pub html: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceRequest {
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesugarResponse {
    pub source: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RunRequest {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResponse {
    pub output: Vec<String>,
    pub dump: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenInfo {
    pub kind: String,
    pub text: String,
    pub line: usize,
    pub col: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TokenizeResponse {
    pub tokens: Vec<TokenInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "error")]
pub enum ServiceError {
    BadRequest {
        message: String,
    },
    ParseError {
        line: usize,
        col: usize,
        message: String,
    },
    RuntimeFault {
        kind: FaultKind,
        line: usize,
        col: usize,
        message: String,
        /// Lines printed before the fault.
        output: Vec<String>,
    },
}

impl ServiceError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ServiceError::BadRequest {
            message: message.into(),
        }
    }

    pub fn status(&self) -> u16 {
        match self {
            ServiceError::BadRequest { .. } => 400,
            ServiceError::ParseError { .. } | ServiceError::RuntimeFault { .. } => 422,
        }
    }
}

impl From<ParseError> for ServiceError {
    fn from(e: ParseError) -> Self {
        ServiceError::ParseError {
            line: e.line,
            col: e.col,
            message: e.to_string(),
        }
    }
}

impl From<DocDbError> for ServiceError {
    fn from(e: DocDbError) -> Self {
        ServiceError::bad_request(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Hover,
    Desugar,
    Run,
    Tokenize,
}

impl Endpoint {
    pub fn from_path(path: &str) -> Option<Self> {
        Some(match path {
            "/hover" => Endpoint::Hover,
            "/desugar" => Endpoint::Desugar,
            "/run" => Endpoint::Run,
            "/tokenize" => Endpoint::Tokenize,
            _ => return None,
        })
    }
}

/// A serialized reply: HTTP status plus JSON body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone)]
pub struct Service {
    docs: DocDatabase,
    budget_cap: u64,
}

impl Default for Service {
    fn default() -> Self {
        Service {
            docs: DocDatabase::starter(),
            budget_cap: DEFAULT_BUDGET_CAP,
        }
    }
}

impl Service {
    /// Built-in docs overlaid with `doc_paths` in order.
    pub fn new<P: AsRef<std::path::Path>>(doc_paths: &[P]) -> Result<Self, DocDbError> {
        let mut docs = DocDatabase::starter();
        for p in doc_paths {
            docs.overlay(DocDatabase::from_file(p.as_ref())?);
        }
        Ok(Service {
            docs,
            budget_cap: DEFAULT_BUDGET_CAP,
        })
    }

    pub fn with_budget_cap(mut self, cap: u64) -> Self {
        self.budget_cap = cap;
        self
    }

    pub fn budget_cap(&self) -> u64 {
        self.budget_cap
    }

    pub fn docs(&self) -> &DocDatabase {
        &self.docs
    }

    pub fn handle_hover(&self, req: &HoverRequest) -> Result<HoverResponse, ServiceError> {
        if req.line == 0 || req.col == 0 {
            return Err(ServiceError::bad_request("line and col are 1-based"));
        }
        let mut db = self.docs.clone();
        for p in req.doc_paths.iter().flatten() {
            db.overlay(DocDatabase::from_file(p.as_ref())?);
        }
        let program = parse_program(&req.source).ok();
        if let Some(p) = &program {
            db.set_program(p);
        }
        Ok(
            match hover(program.as_ref(), &req.source, req.line, req.col, &db) {
                Some(hit) => HoverResponse {
                    found: true,
                    word: hit.word,
                    category: hit.category.as_str().to_string(),
                    snippet: first_paragraph(&hit.markdown),
                    html: render_html(&hit.markdown),
                    full_markdown: hit.markdown,
                },
                None => HoverResponse::default(),
            },
        )
    }

    pub fn handle_desugar(&self, req: &SourceRequest) -> Result<DesugarResponse, ServiceError> {
        let program = parse_program(&req.source)?;
        Ok(DesugarResponse {
            source: pretty_print(&desugar(&program)),
        })
    }

    pub fn handle_run(&self, req: &RunRequest) -> Result<RunResponse, ServiceError> {
        let budget = req.step_budget.unwrap_or(self.budget_cap);
        if budget == 0 || budget > self.budget_cap {
            return Err(ServiceError::bad_request(format!(
                "stepBudget must be between 1 and {}",
                self.budget_cap
            )));
        }
        let program = parse_program(&req.source)?;
        match run(&program, budget) {
            Ok(ex) => Ok(RunResponse {
                output: ex.output,
                dump: ex.dump,
            }),
            Err(failure) => Err(ServiceError::RuntimeFault {
                kind: failure.fault.kind,
                line: failure.fault.pos.line,
                col: failure.fault.pos.col,
                message: failure.fault.message,
                output: failure.output,
            }),
        }
    }

    pub fn handle_tokenize(&self, req: &SourceRequest) -> Result<TokenizeResponse, ServiceError> {
        let tokens = tokenize(&req.source).map_err(|e| ServiceError::ParseError {
            line: e.line,
            col: e.col,
            message: e.to_string(),
        })?;
        Ok(TokenizeResponse {
            tokens: tokens
                .into_iter()
                .map(|t| TokenInfo {
                    kind: format!("{:?}", t.kind),
                    text: t.text,
                    line: t.line,
                    col: t.col,
                    len: t.len,
                })
                .collect(),
        })
    }

    pub fn respond<T: Serialize>(result: Result<T, ServiceError>) -> Reply {
        let (status, body) = match result {
            Ok(v) => (200, serde_json::to_string(&v)),
            Err(e) => (e.status(), serde_json::to_string(&e)),
        };
        Reply {
            status,
            body: body.expect("response types serialize"),
        }
    }

    /// Decodes a JSON request body, runs the endpoint, encodes the reply.
    pub fn dispatch(&self, endpoint: Endpoint, body: &str) -> Reply {
        fn decode<'a, T: Deserialize<'a>>(body: &'a str) -> Result<T, ServiceError> {
            serde_json::from_str(body)
                .map_err(|e| ServiceError::bad_request(format!("malformed request: {e}")))
        }
        match endpoint {
            Endpoint::Hover => {
                Self::respond(decode::<HoverRequest>(body).and_then(|r| self.handle_hover(&r)))
            }
            Endpoint::Desugar => {
                Self::respond(decode::<SourceRequest>(body).and_then(|r| self.handle_desugar(&r)))
            }
            Endpoint::Run => {
                Self::respond(decode::<RunRequest>(body).and_then(|r| self.handle_run(&r)))
            }
            Endpoint::Tokenize => {
                Self::respond(decode::<SourceRequest>(body).and_then(|r| self.handle_tokenize(&r)))
            }
        }
    }
}
