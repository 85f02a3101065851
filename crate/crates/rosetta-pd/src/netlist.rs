//! Gate-level structural netlist: one module, port and wire declarations,
//! named-port instantiations, constant ties and port aliases via `assign`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rosetta_pd_core::model::{Endpoint, IoPin, Net, NetPin, TieOff, TieValue};
use rosetta_pd_core::{Design, Direction, Instance, Master};

use crate::error::FormatError;
use crate::GENERATED_BY;

const KEYWORDS: &[&str] = &[
    "module", "endmodule", "input", "output", "inout", "wire", "assign", "reg", "supply0", "supply1", "begin", "end",
    "always", "initial", "if", "else", "case", "endcase", "for", "function", "task", "parameter", "tri", "wand", "wor",
];

fn is_plain(name: &str) -> bool {
    let mut b = name.bytes();
    matches!(b.next(), Some(c) if c.is_ascii_alphabetic() || c == b'_')
        && b.all(|c| c.is_ascii_alphanumeric() || c == b'_' || c == b'$')
        && !KEYWORDS.contains(&name)
}

/// Verilog identifier for `name`: plain when legal, escaped otherwise.
pub fn ident(name: &str) -> String {
    if is_plain(name) {
        name.to_string()
    } else {
        format!("\\{name} ")
    }
}

fn direction_kw(d: Direction) -> &'static str {
    match d {
        Direction::Input => "input",
        Direction::Output => "output",
        Direction::Inout => "inout",
    }
}

/// Structural text for a design. Instances, nets and ports share one name
/// space; a net may reuse the name of a port it connects to.
pub fn write_structural_netlist(design: &Design) -> Result<String, FormatError> {
    let ports: BTreeSet<&str> = design.io_pins.iter().map(|p| p.name.as_str()).collect();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for n in design.instances.iter().map(|i| i.name.as_str()).chain(ports.iter().copied()) {
        if !seen.insert(n) {
            return Err(FormatError::NameCollision(n.to_string()));
        }
    }
    for net in &design.nets {
        let own_port = net.pins.iter().any(|p| matches!(&p.endpoint, Endpoint::Io { name } if *name == net.name));
        if seen.contains(net.name.as_str()) && !(own_port && ports.contains(net.name.as_str())) {
            return Err(FormatError::NameCollision(net.name.clone()));
        }
    }
    let mut net_names: BTreeSet<&str> = BTreeSet::new();
    for net in &design.nets {
        if !net_names.insert(&net.name) {
            return Err(FormatError::NameCollision(net.name.clone()));
        }
    }

    // (instance, pin) -> net
    let mut conn: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    let mut assigns: Vec<(&IoPin, &str)> = Vec::new();
    let io_by_name: BTreeMap<&str, &IoPin> = design.io_pins.iter().map(|p| (p.name.as_str(), p)).collect();
    for net in &design.nets {
        for p in &net.pins {
            match &p.endpoint {
                Endpoint::Instance { instance, pin } => {
                    if let Some(prev) = conn.insert((instance, pin), &net.name) {
                        return Err(FormatError::Invalid(format!("pin {instance}/{pin} is on nets {prev} and {}", net.name)));
                    }
                }
                Endpoint::Io { name } if *name != net.name => match io_by_name.get(name.as_str()) {
                    Some(io) => assigns.push((io, &net.name)),
                    None => return Err(FormatError::Invalid(format!("net {} names unknown port {name}", net.name))),
                },
                Endpoint::Io { .. } => {}
            }
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "// {GENERATED_BY}");
    let port_list: Vec<String> = design.io_pins.iter().map(|p| ident(&p.name)).collect();
    let _ = writeln!(s, "module {} ({});", ident(&design.name), port_list.join(", "));
    for p in &design.io_pins {
        let _ = writeln!(s, "  {} {};", direction_kw(p.direction), ident(&p.name));
    }
    for net in &design.nets {
        let _ = writeln!(s, "  wire {};", ident(&net.name));
    }
    let masters = design.master_index();
    for inst in &design.instances {
        let mut pins: Vec<(&str, String)> = Vec::new();
        let order: Vec<&str> = match masters.get(inst.master.as_str()) {
            Some(m) => m.pins.iter().map(|p| p.name.as_str()).collect(),
            None => Vec::new(),
        };
        let ties: BTreeMap<&str, TieValue> = inst.tie_offs.iter().map(|t| (t.pin.as_str(), t.value)).collect();
        let mut listed: BTreeSet<&str> = BTreeSet::new();
        let conn_pins = conn.range((inst.name.as_str(), "")..).take_while(|((i, _), _)| *i == inst.name).map(|((_, p), _)| *p);
        let all: Vec<&str> = order.iter().copied().chain(conn_pins).chain(ties.keys().copied()).collect();
        for pin in all {
            if !listed.insert(pin) {
                continue;
            }
            if let Some(net) = conn.get(&(inst.name.as_str(), pin)) {
                pins.push((pin, ident(net)));
            } else if let Some(v) = ties.get(pin) {
                pins.push((
                    pin,
                    match v {
                        TieValue::Low => "1'b0".into(),
                        TieValue::High => "1'b1".into(),
                        TieValue::Open => String::new(),
                    },
                ));
            }
        }
        let body: Vec<String> = pins.iter().map(|(p, n)| format!(".{}({})", ident(p), n)).collect();
        let _ = writeln!(s, "  {} {} ({});", ident(&inst.master), ident(&inst.name), body.join(", "));
    }
    for (io, net) in assigns {
        match io.direction {
            Direction::Input => {
                let _ = writeln!(s, "  assign {} = {};", ident(net), ident(&io.name));
            }
            _ => {
                let _ = writeln!(s, "  assign {} = {};", ident(&io.name), ident(net));
            }
        }
    }
    s.push_str("endmodule\n");
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Id(String),
    Punct(char),
    Const(TieValue),
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormatError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line) = (0, 1);
    let err = |line: usize, msg: String| FormatError::syntax("netlist", line, 1, msg);
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if text[i..].starts_with("//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if text[i..].starts_with("/*") {
            let end = text[i + 2..].find("*/").ok_or_else(|| err(line, "unterminated comment".into()))?;
            line += text[i..i + 2 + end].matches('\n').count();
            i += end + 4;
        } else if c == b'\\' {
            let start = i + 1;
            while i < b.len() && !b[i].is_ascii_whitespace() {
                i += 1;
            }
            out.push((Tok::Id(text[start..i].to_string()), line));
        } else if c.is_ascii_alphanumeric() || c == b'_' || c == b'$' || c == b'\'' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$' || b[i] == b'\'') {
                i += 1;
            }
            let w = &text[start..i];
            let tok = match w {
                "1'b0" | "1'h0" | "1'd0" => Tok::Const(TieValue::Low),
                "1'b1" | "1'h1" | "1'd1" => Tok::Const(TieValue::High),
                w if w.contains('\'') => return Err(err(line, format!("unsupported constant `{w}`"))),
                w => Tok::Id(w.to_string()),
            };
            out.push((tok, line));
        } else if b"();,.=".contains(&c) {
            out.push((Tok::Punct(c as char), line));
            i += 1;
        } else {
            return Err(err(line, format!("unexpected character `{}`", c as char)));
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl P {
    fn err(&self, msg: impl Into<String>) -> FormatError {
        let line = self.toks.get(self.pos).or(self.toks.last()).map_or(1, |t| t.1);
        FormatError::syntax("netlist", line, 1, msg)
    }
    fn next(&mut self) -> Result<Tok, FormatError> {
        let t = self.toks.get(self.pos).cloned().ok_or_else(|| self.err("unexpected end of netlist"))?;
        self.pos += 1;
        Ok(t.0)
    }
    fn id(&mut self) -> Result<String, FormatError> {
        match self.next()? {
            Tok::Id(s) => Ok(s),
            t => Err(self.err(format!("expected identifier, found {t:?}"))),
        }
    }
    fn punct(&mut self, c: char) -> Result<(), FormatError> {
        match self.next()? {
            Tok::Punct(p) if p == c => Ok(()),
            t => Err(self.err(format!("expected `{c}`, found {t:?}"))),
        }
    }
    fn eat(&mut self, c: char) -> bool {
        if self.toks.get(self.pos).is_some_and(|t| t.0 == Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

/// Reads text produced by [`write_structural_netlist`] (or any netlist in the
/// same subset). Instance types must name one of `masters`.
pub fn read_structural_netlist(text: &str, masters: &[Master], units: u32) -> Result<Design, FormatError> {
    let mut p = P { toks: lex(text)?, pos: 0 };
    match p.id()?.as_str() {
        "module" => {}
        other => return Err(p.err(format!("expected `module`, found `{other}`"))),
    }
    let mut d = Design::new(p.id()?, units);
    let mut port_order = Vec::new();
    p.punct('(')?;
    if !p.eat(')') {
        loop {
            port_order.push(p.id()?);
            if p.eat(')') {
                break;
            }
            p.punct(',')?;
        }
    }
    p.punct(';')?;
    let mut port_dir: BTreeMap<String, Direction> = BTreeMap::new();
    let mut nets: Vec<Net> = Vec::new();
    let mut net_idx: BTreeMap<String, usize> = BTreeMap::new();
    let by_name: BTreeMap<&str, &Master> = masters.iter().map(|m| (m.name.as_str(), m)).collect();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut aliases: Vec<(String, String)> = Vec::new();
    loop {
        let kw = p.id()?;
        match kw.as_str() {
            "endmodule" => break,
            "input" | "output" | "inout" => {
                let dir = Direction::parse(&kw.to_ascii_uppercase()).unwrap();
                loop {
                    port_dir.insert(p.id()?, dir);
                    if p.eat(';') {
                        break;
                    }
                    p.punct(',')?;
                }
            }
            "wire" => loop {
                let name = p.id()?;
                if net_idx.insert(name.clone(), nets.len()).is_some() {
                    return Err(FormatError::NameCollision(name));
                }
                nets.push(Net::new(name));
                if p.eat(';') {
                    break;
                }
                p.punct(',')?;
            },
            "assign" => {
                let a = p.id()?;
                p.punct('=')?;
                let b = p.id()?;
                p.punct(';')?;
                aliases.push((a, b));
            }
            _ => {
                let master = kw;
                if !by_name.contains_key(master.as_str()) {
                    return Err(FormatError::UnknownMaster { component: p.id().unwrap_or_default(), master });
                }
                let mut inst = Instance::new(p.id()?, master.clone());
                used.insert(master);
                p.punct('(')?;
                if !p.eat(')') {
                    loop {
                        p.punct('.')?;
                        let pin = p.id()?;
                        p.punct('(')?;
                        match p.next()? {
                            Tok::Punct(')') => inst.tie_offs.push(TieOff { pin, value: TieValue::Open }),
                            Tok::Const(v) => {
                                inst.tie_offs.push(TieOff { pin, value: v });
                                p.punct(')')?;
                            }
                            Tok::Id(net) => {
                                let k = *net_idx.get(&net).ok_or_else(|| p.err(format!("undeclared net `{net}`")))?;
                                nets[k].pins.push(NetPin::new(Endpoint::inst(inst.name.clone(), pin)));
                                p.punct(')')?;
                            }
                            t => return Err(p.err(format!("unexpected {t:?} in connection"))),
                        }
                        if p.eat(')') {
                            break;
                        }
                        p.punct(',')?;
                    }
                }
                p.punct(';')?;
                d.instances.push(inst);
            }
        }
    }
    for name in &port_order {
        let dir = *port_dir.get(name).ok_or_else(|| p.err(format!("port `{name}` has no direction")))?;
        d.io_pins.push(IoPin::new(name.clone(), dir));
        if let Some(&k) = net_idx.get(name) {
            nets[k].pins.push(NetPin::new(Endpoint::io(name.clone())));
        }
    }
    for (a, b) in aliases {
        let (port, net) = if port_dir.contains_key(&a) && net_idx.contains_key(&b) { (a, b) } else { (b, a) };
        if !port_dir.contains_key(&port) {
            return Err(p.err(format!("assign between `{port}` and `{net}` does not name a port")));
        }
        let k = *net_idx.get(&net).ok_or_else(|| p.err(format!("undeclared net `{net}`")))?;
        nets[k].pins.push(NetPin::new(Endpoint::io(port)));
    }
    d.nets = nets;
    d.masters = masters.iter().filter(|m| used.contains(&m.name)).cloned().collect();
    Ok(d)
}
