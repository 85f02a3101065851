//! Bookshelf file family: `.aux` manifest plus `.nodes`, `.nets`, `.wts`,
//! `.pl` and `.scl` members.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rosetta_pd_core::bookshelf::{
    design_to_bundle, AuxManifest, BookshelfBundle, Movability, NetRecord, NodeRecord, PinRecord, PlRecord, PlStatus,
    SclRow,
};
use rosetta_pd_core::num::Decimal;
use rosetta_pd_core::{Design, Direction, Orientation};

use crate::error::{read_file, write_file, FormatError};
use crate::GENERATED_BY;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Unknown trailing tokens are errors instead of warnings.
    pub strict: bool,
}

#[derive(Clone, Debug, Default)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

/// One significant line: comments stripped, `:` split into its own token.
struct Line<'a> {
    no: usize,
    toks: Vec<Tok<'a>>,
}

fn lex(text: &str) -> Vec<Line<'_>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut toks = Vec::new();
        let mut start = None;
        for (j, c) in body.char_indices() {
            let sep = c.is_whitespace() || c == ':';
            if sep {
                if let Some(s) = start.take() {
                    toks.push(Tok { text: &body[s..j], col: s + 1 });
                }
                if c == ':' {
                    toks.push(Tok { text: ":", col: j + 1 });
                }
            } else if start.is_none() {
                start = Some(j);
            }
        }
        if let Some(s) = start {
            toks.push(Tok { text: &body[s..], col: s + 1 });
        }
        if toks.is_empty() || toks[0].text == "UCLA" {
            continue;
        }
        out.push(Line { no: i + 1, toks });
    }
    out
}

struct Ctx<'a> {
    file: &'a str,
    opts: ParseOptions,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn err(&self, line: &Line, k: usize, msg: impl Into<String>) -> FormatError {
        let col = line.toks.get(k).map_or_else(|| line.toks.last().map_or(1, |t| t.col + t.text.len()), |t| t.col);
        FormatError::syntax(self.file, line.no, col, msg)
    }

    fn tok<'l>(&self, line: &'l Line, k: usize, what: &str) -> Result<&'l str, FormatError> {
        line.toks.get(k).map(|t| t.text).ok_or_else(|| self.err(line, k, format!("expected {what}")))
    }

    fn dec(&self, line: &Line, k: usize, what: &str) -> Result<Decimal, FormatError> {
        let t = self.tok(line, k, what)?;
        t.parse().map_err(|_| self.err(line, k, format!("bad number `{t}` for {what}")))
    }

    fn uint(&self, line: &Line, k: usize, what: &str) -> Result<usize, FormatError> {
        let t = self.tok(line, k, what)?;
        t.parse().map_err(|_| self.err(line, k, format!("bad count `{t}` for {what}")))
    }

    fn trailing(&mut self, line: &Line, used: usize) -> Result<(), FormatError> {
        if line.toks.len() > used {
            let extra: Vec<&str> = line.toks[used..].iter().map(|t| t.text).collect();
            let msg = format!("unexpected trailing tokens `{}`", extra.join(" "));
            if self.opts.strict {
                return Err(self.err(line, used, msg));
            }
            self.warnings.push(format!("{}:{}: {}", self.file, line.no, msg));
        }
        Ok(())
    }
}

/// `Key : value` header line.
fn header(line: &Line, key: &str) -> bool {
    line.toks.len() >= 2 && line.toks[0].text.eq_ignore_ascii_case(key) && line.toks[1].text == ":"
}

fn check_count(file: &str, what: &str, declared: Option<usize>, found: usize) -> Result<(), FormatError> {
    match declared {
        Some(d) if d != found => Err(FormatError::HeaderMismatch {
            file: file.into(),
            what: what.into(),
            declared: d,
            found,
        }),
        _ => Ok(()),
    }
}

fn parse_nodes(file: &str, text: &str, opts: ParseOptions) -> Result<Parsed<Vec<NodeRecord>>, FormatError> {
    let mut cx = Ctx { file, opts, warnings: Vec::new() };
    let (mut num_nodes, mut num_terms) = (None, None);
    let mut nodes = Vec::new();
    for line in lex(text) {
        if header(&line, "NumNodes") {
            num_nodes = Some(cx.uint(&line, 2, "NumNodes")?);
            cx.trailing(&line, 3)?;
            continue;
        }
        if header(&line, "NumTerminals") {
            num_terms = Some(cx.uint(&line, 2, "NumTerminals")?);
            cx.trailing(&line, 3)?;
            continue;
        }
        let name = cx.tok(&line, 0, "node name")?.to_string();
        let width = cx.dec(&line, 1, "width")?;
        let height = cx.dec(&line, 2, "height")?;
        let (movability, used) = match line.toks.get(3).map(|t| t.text) {
            Some(t) if t.eq_ignore_ascii_case("terminal") => (Movability::Terminal, 4),
            Some(t) if t.eq_ignore_ascii_case("terminal_NI") => (Movability::TerminalNi, 4),
            _ => (Movability::Movable, 3),
        };
        cx.trailing(&line, used)?;
        nodes.push(NodeRecord { name, width, height, movability });
    }
    check_count(file, "NumNodes", num_nodes, nodes.len())?;
    let terms = nodes.iter().filter(|n| n.movability != Movability::Movable).count();
    check_count(file, "NumTerminals", num_terms, terms)?;
    Ok(Parsed { value: nodes, warnings: cx.warnings })
}

fn parse_direction(t: &str) -> Option<Option<Direction>> {
    match t {
        "I" | "i" => Some(Some(Direction::Input)),
        "O" | "o" => Some(Some(Direction::Output)),
        "B" | "b" => Some(None),
        _ => None,
    }
}

fn parse_nets(file: &str, text: &str, opts: ParseOptions) -> Result<Parsed<Vec<NetRecord>>, FormatError> {
    let mut cx = Ctx { file, opts, warnings: Vec::new() };
    let (mut num_nets, mut num_pins) = (None, None);
    let mut nets: Vec<NetRecord> = Vec::new();
    let mut open: Option<usize> = None;
    let close = |nets: &[NetRecord], open: Option<usize>| -> Result<(), FormatError> {
        if let (Some(k), Some(net)) = (open, nets.last()) {
            check_count(file, &format!("NetDegree of `{}`", net.name), Some(k), net.pins.len())?;
        }
        Ok(())
    };
    for line in lex(text) {
        if header(&line, "NumNets") {
            num_nets = Some(cx.uint(&line, 2, "NumNets")?);
            cx.trailing(&line, 3)?;
            continue;
        }
        if header(&line, "NumPins") {
            num_pins = Some(cx.uint(&line, 2, "NumPins")?);
            cx.trailing(&line, 3)?;
            continue;
        }
        if header(&line, "NetDegree") {
            close(&nets, open)?;
            let k = cx.uint(&line, 2, "NetDegree")?;
            let name = line.toks.get(3).map_or(String::new(), |t| t.text.to_string());
            cx.trailing(&line, 4)?;
            nets.push(NetRecord { name, pins: Vec::with_capacity(k) });
            open = Some(k);
            continue;
        }
        if open.is_none() {
            return Err(cx.err(&line, 0, "pin line outside a NetDegree block"));
        }
        let node = cx.tok(&line, 0, "node name")?.to_string();
        let mut k = 1;
        let mut direction = None;
        if let Some(d) = line.toks.get(1).and_then(|t| parse_direction(t.text)) {
            direction = d;
            k = 2;
        }
        let mut offset = None;
        if line.toks.get(k).is_some_and(|t| t.text == ":") {
            offset = Some((cx.dec(&line, k + 1, "x offset")?, cx.dec(&line, k + 2, "y offset")?));
            k += 3;
        }
        cx.trailing(&line, k)?;
        nets.last_mut().expect("open net").pins.push(PinRecord { node, direction, offset });
    }
    close(&nets, open)?;
    check_count(file, "NumNets", num_nets, nets.len())?;
    check_count(file, "NumPins", num_pins, nets.iter().map(|n| n.pins.len()).sum())?;
    Ok(Parsed { value: nets, warnings: cx.warnings })
}

fn parse_pl(file: &str, text: &str, opts: ParseOptions) -> Result<Parsed<Vec<PlRecord>>, FormatError> {
    let mut cx = Ctx { file, opts, warnings: Vec::new() };
    let mut pl = Vec::new();
    for line in lex(text) {
        let name = cx.tok(&line, 0, "node name")?.to_string();
        let x = cx.dec(&line, 1, "x")?;
        let y = cx.dec(&line, 2, "y")?;
        let mut k = 3;
        let mut orientation = None;
        if line.toks.get(k).is_some_and(|t| t.text == ":") {
            let t = cx.tok(&line, k + 1, "orientation")?;
            orientation = Some(t.parse::<Orientation>().map_err(|e| cx.err(&line, k + 1, e.to_string()))?);
            k += 2;
        }
        let status = match line.toks.get(k).map(|t| t.text) {
            Some("/FIXED") => {
                k += 1;
                PlStatus::Fixed
            }
            Some("/FIXED_NI") => {
                k += 1;
                PlStatus::FixedNi
            }
            _ => PlStatus::Movable,
        };
        cx.trailing(&line, k)?;
        pl.push(PlRecord { name, x, y, orientation, status });
    }
    Ok(Parsed { value: pl, warnings: cx.warnings })
}

fn parse_scl(file: &str, text: &str, opts: ParseOptions) -> Result<Parsed<Vec<SclRow>>, FormatError> {
    let mut cx = Ctx { file, opts, warnings: Vec::new() };
    let mut num_rows = None;
    let mut rows = Vec::new();
    let mut cur: Option<SclRow> = None;
    let zero = Decimal::from_int(0);
    for line in lex(text) {
        if header(&line, "NumRows") {
            num_rows = Some(cx.uint(&line, 2, "NumRows")?);
            cx.trailing(&line, 3)?;
            continue;
        }
        let key = line.toks[0].text;
        if key.eq_ignore_ascii_case("CoreRow") {
            if cur.is_some() {
                return Err(cx.err(&line, 0, "CoreRow before End of the previous row"));
            }
            cur = Some(SclRow {
                coordinate: zero,
                height: zero,
                sitewidth: zero,
                sitespacing: zero,
                siteorient: "N".into(),
                sitesymmetry: "1".into(),
                subrow_origin: zero,
                num_sites: 0,
            });
            cx.trailing(&line, 2)?;
            continue;
        }
        if key.eq_ignore_ascii_case("End") {
            match cur.take() {
                Some(r) => rows.push(r),
                None => return Err(cx.err(&line, 0, "End outside a CoreRow block")),
            }
            continue;
        }
        let Some(row) = cur.as_mut() else {
            return Err(cx.err(&line, 0, "row attribute outside a CoreRow block"));
        };
        if line.toks.get(1).map(|t| t.text) != Some(":") {
            return Err(cx.err(&line, 1, "expected `:`"));
        }
        let mut used = 3;
        match key.to_ascii_lowercase().as_str() {
            "coordinate" => row.coordinate = cx.dec(&line, 2, key)?,
            "height" => row.height = cx.dec(&line, 2, key)?,
            "sitewidth" => row.sitewidth = cx.dec(&line, 2, key)?,
            "sitespacing" => row.sitespacing = cx.dec(&line, 2, key)?,
            "siteorient" | "siteorientation" => row.siteorient = cx.tok(&line, 2, key)?.to_string(),
            "sitesymmetry" | "sitesymmetric" => row.sitesymmetry = cx.tok(&line, 2, key)?.to_string(),
            "subroworigin" => {
                row.subrow_origin = cx.dec(&line, 2, key)?;
                if line.toks.get(3).is_some_and(|t| t.text.eq_ignore_ascii_case("NumSites")) {
                    if line.toks.get(4).map(|t| t.text) != Some(":") {
                        return Err(cx.err(&line, 4, "expected `:`"));
                    }
                    row.num_sites = cx.uint(&line, 5, "NumSites")? as u32;
                    used = 6;
                }
            }
            "numsites" => row.num_sites = cx.uint(&line, 2, key)? as u32,
            _ => {
                let msg = format!("unknown row attribute `{key}`");
                if cx.opts.strict {
                    return Err(cx.err(&line, 0, msg));
                }
                cx.warnings.push(format!("{file}:{}: {msg}", line.no));
                continue;
            }
        }
        cx.trailing(&line, used)?;
    }
    if cur.is_some() {
        return Err(FormatError::syntax(file, text.lines().count(), 1, "unterminated CoreRow block"));
    }
    check_count(file, "NumRows", num_rows, rows.len())?;
    Ok(Parsed { value: rows, warnings: cx.warnings })
}

fn parse_wts(file: &str, text: &str, opts: ParseOptions) -> Result<Parsed<Vec<(String, u32)>>, FormatError> {
    let mut cx = Ctx { file, opts, warnings: Vec::new() };
    let mut wts = Vec::new();
    for line in lex(text) {
        let name = cx.tok(&line, 0, "name")?.to_string();
        let w = cx.uint(&line, 1, "weight")?;
        let w = u32::try_from(w).map_err(|_| cx.err(&line, 1, "weight out of range"))?;
        cx.trailing(&line, 2)?;
        wts.push((name, w));
    }
    Ok(Parsed { value: wts, warnings: cx.warnings })
}

fn parse_aux(file: &str, text: &str) -> Result<AuxManifest, FormatError> {
    let mut aux = AuxManifest::default();
    let lines = lex(text);
    let Some(line) = lines.first() else {
        return Err(FormatError::syntax(file, 1, 1, "empty manifest"));
    };
    if line.toks.len() < 3 || line.toks[1].text != ":" {
        return Err(FormatError::syntax(file, line.no, 1, "expected `<Kind> : <files>`"));
    }
    for t in &line.toks[2..] {
        let slot = match Path::new(t.text).extension().and_then(|e| e.to_str()) {
            Some("nodes") => &mut aux.nodes,
            Some("nets") => &mut aux.nets,
            Some("pl") => &mut aux.pl,
            Some("scl") => &mut aux.scl,
            Some("wts") => {
                aux.wts = Some(t.text.to_string());
                continue;
            }
            _ => continue,
        };
        *slot = t.text.to_string();
    }
    if aux.nodes.is_empty() || aux.nets.is_empty() {
        return Err(FormatError::syntax(file, line.no, 1, "manifest must list .nodes and .nets files"));
    }
    Ok(aux)
}

/// Reads the bundle named by an `.aux` manifest. Member files are resolved
/// relative to the manifest and parsed in parallel.
pub fn parse_bookshelf(aux_path: &Path, opts: ParseOptions) -> Result<Parsed<BookshelfBundle>, FormatError> {
    let aux_text = read_file(aux_path)?;
    let aux_name = aux_path.display().to_string();
    let aux = parse_aux(&aux_name, &aux_text)?;
    let dir = aux_path.parent().unwrap_or(Path::new("."));
    let load = |name: &str| -> Result<(String, String), FormatError> {
        if name.is_empty() {
            return Ok((String::new(), String::new()));
        }
        let p = dir.join(name);
        Ok((p.display().to_string(), read_file(&p)?))
    };
    let nodes_f = load(&aux.nodes)?;
    let nets_f = load(&aux.nets)?;
    let pl_f = load(&aux.pl)?;
    let scl_f = load(&aux.scl)?;
    let wts_f = match &aux.wts {
        Some(w) => load(w)?,
        None => (String::new(), String::new()),
    };

    let ((nodes, nets), ((pl, scl), wts)) = rayon::join(
        || rayon::join(|| parse_nodes(&nodes_f.0, &nodes_f.1, opts), || parse_nets(&nets_f.0, &nets_f.1, opts)),
        || {
            rayon::join(
                || rayon::join(|| parse_pl(&pl_f.0, &pl_f.1, opts), || parse_scl(&scl_f.0, &scl_f.1, opts)),
                || parse_wts(&wts_f.0, &wts_f.1, opts),
            )
        },
    );
    let (nodes, nets, pl, scl, wts) = (nodes?, nets?, pl?, scl?, wts?);

    let declared: std::collections::HashSet<&str> = nodes.value.iter().map(|n| n.name.as_str()).collect();
    for net in &nets.value {
        for p in &net.pins {
            if !declared.contains(p.node.as_str()) {
                return Err(FormatError::UnknownNode { net: net.name.clone(), node: p.node.clone() });
            }
        }
    }

    let mut warnings = Vec::new();
    for w in [nodes.warnings, nets.warnings, pl.warnings, scl.warnings, wts.warnings] {
        warnings.extend(w);
    }
    let name = aux_path.file_stem().and_then(|s| s.to_str()).unwrap_or("design").to_string();
    Ok(Parsed {
        value: BookshelfBundle {
            name,
            aux,
            nodes: nodes.value,
            nets: nets.value,
            pl: pl.value,
            rows: scl.value,
            wts: wts.value,
        },
        warnings,
    })
}

fn banner(kind: &str) -> String {
    format!("UCLA {kind} 1.0\n# {GENERATED_BY}\n\n")
}

pub fn nodes_text(b: &BookshelfBundle) -> String {
    let mut s = banner("nodes");
    let terms = b.terminal_count();
    let _ = writeln!(s, "NumNodes : {}\nNumTerminals : {}\n", b.nodes.len(), terms);
    for n in &b.nodes {
        let kind = match n.movability {
            Movability::Movable => "",
            Movability::Terminal => " terminal",
            Movability::TerminalNi => " terminal_NI",
        };
        let _ = writeln!(s, "  {} {} {}{}", n.name, n.width, n.height, kind);
    }
    s
}

pub fn nets_text(b: &BookshelfBundle) -> String {
    let mut s = banner("nets");
    let _ = writeln!(s, "NumNets : {}\nNumPins : {}\n", b.nets.len(), b.pin_count());
    for n in &b.nets {
        if n.name.is_empty() {
            let _ = writeln!(s, "NetDegree : {}", n.pins.len());
        } else {
            let _ = writeln!(s, "NetDegree : {} {}", n.pins.len(), n.name);
        }
        for p in &n.pins {
            let d = match p.direction {
                Some(Direction::Input) => "I",
                Some(Direction::Output) => "O",
                _ => "B",
            };
            match p.offset {
                Some((x, y)) => {
                    let _ = writeln!(s, "  {} {} : {} {}", p.node, d, x, y);
                }
                None => {
                    let _ = writeln!(s, "  {} {}", p.node, d);
                }
            }
        }
    }
    s
}

pub fn pl_text(b: &BookshelfBundle) -> String {
    let mut s = banner("pl");
    for r in &b.pl {
        let _ = write!(s, "{} {} {}", r.name, r.x, r.y);
        if let Some(o) = r.orientation {
            let _ = write!(s, " : {o}");
        }
        match r.status {
            PlStatus::Movable => {}
            PlStatus::Fixed => s.push_str(" /FIXED"),
            PlStatus::FixedNi => s.push_str(" /FIXED_NI"),
        }
        s.push('\n');
    }
    s
}

pub fn scl_text(b: &BookshelfBundle) -> String {
    let mut s = banner("scl");
    let _ = writeln!(s, "NumRows : {}\n", b.rows.len());
    for r in &b.rows {
        let _ = writeln!(
            s,
            "CoreRow Horizontal\n  Coordinate : {}\n  Height : {}\n  Sitewidth : {}\n  Sitespacing : {}\n  Siteorient : {}\n  Sitesymmetry : {}\n  SubrowOrigin : {} NumSites : {}\nEnd",
            r.coordinate, r.height, r.sitewidth, r.sitespacing, r.siteorient, r.sitesymmetry, r.subrow_origin, r.num_sites
        );
    }
    s
}

pub fn wts_text(b: &BookshelfBundle) -> String {
    let mut s = banner("wts");
    for (n, w) in &b.wts {
        let _ = writeln!(s, "{n} {w}");
    }
    s
}

/// Writes every member of `bundle` plus its manifest into `dir`; returns the manifest path.
pub fn write_bundle(bundle: &BookshelfBundle, dir: &Path) -> Result<PathBuf, FormatError> {
    let mut aux = bundle.aux.clone();
    let base = &bundle.name;
    let default = |f: &mut String, ext: &str| {
        if f.is_empty() {
            *f = format!("{base}.{ext}");
        }
    };
    default(&mut aux.nodes, "nodes");
    default(&mut aux.nets, "nets");
    default(&mut aux.pl, "pl");
    default(&mut aux.scl, "scl");
    if bundle.wts.is_empty() {
        aux.wts = None;
    } else if aux.wts.is_none() {
        aux.wts = Some(format!("{base}.wts"));
    }
    write_file(&dir.join(&aux.nodes), &nodes_text(bundle))?;
    write_file(&dir.join(&aux.nets), &nets_text(bundle))?;
    write_file(&dir.join(&aux.pl), &pl_text(bundle))?;
    write_file(&dir.join(&aux.scl), &scl_text(bundle))?;
    let mut members = vec![aux.nodes.as_str(), aux.nets.as_str()];
    if let Some(w) = &aux.wts {
        write_file(&dir.join(w), &wts_text(bundle))?;
        members.push(w);
    }
    members.push(&aux.pl);
    members.push(&aux.scl);
    let aux_path = dir.join(format!("{base}.aux"));
    write_file(&aux_path, &format!("RowBasedPlacement : {}\n", members.join(" ")))?;
    Ok(aux_path)
}

/// Bookshelf form of `design` written into `dir`.
pub fn write_bookshelf(design: &Design, dir: &Path) -> Result<(BookshelfBundle, PathBuf), FormatError> {
    let bundle = design_to_bundle(design);
    let aux = write_bundle(&bundle, dir)?;
    Ok((bundle, aux))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexer_splits_colons_and_drops_comments() {
        let l = lex("UCLA nodes 1.0\n# c\nNumNodes:3 # trailing\n  a 1 2 terminal\n");
        assert_eq!(l.len(), 2);
        let t: Vec<&str> = l[0].toks.iter().map(|t| t.text).collect();
        assert_eq!(t, ["NumNodes", ":", "3"]);
        assert_eq!(l[1].toks[0].col, 3);
        assert_eq!(l[1].no, 4);
    }

    #[test]
    fn trailing_tokens_strict_vs_lenient() {
        let text = "NumNodes : 1\nNumTerminals : 0\na 1 1 junk\n";
        let err = parse_nodes("x.nodes", text, ParseOptions { strict: true }).unwrap_err();
        match err {
            FormatError::Syntax { line, col, .. } => assert_eq!((line, col), (3, 7)),
            e => panic!("{e}"),
        }
        let ok = parse_nodes("x.nodes", text, ParseOptions::default()).unwrap();
        assert_eq!(ok.value.len(), 1);
        assert_eq!(ok.warnings.len(), 1);
    }

    #[test]
    fn net_degree_mismatch() {
        let text = "NetDegree : 3 n0\n a I\n b O\n";
        assert!(matches!(
            parse_nets("x.nets", text, ParseOptions::default()),
            Err(FormatError::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn scl_block() {
        let text = "NumRows : 1\nCoreRow Horizontal\n Coordinate : 0\n Height : 12\n Sitewidth : 1\n Sitespacing : 1\n Siteorient : 1\n Sitesymmetry : 1\n SubrowOrigin : 5 NumSites : 40\nEnd\n";
        let rows = parse_scl("x.scl", text, ParseOptions { strict: true }).unwrap().value;
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].num_sites, 40);
        assert_eq!(rows[0].subrow_origin, Decimal::from_int(5));
    }
}
