//! Binary store: magic `NGDBKG01`, u32 counts (entities, relations, triples per
//! layer), the three layers as u32 `(head, relation, tail)` triplets, then the
//! entity and relation dictionaries as length-prefixed UTF-8 strings.

use std::fs;
use std::path::Path;

use crate::binio::{put_u32, Reader};
use crate::error::{Error, Result};

use super::{Dictionary, GraphStack, KnowledgeGraph, Triple};

pub const STORE_MAGIC: &[u8; 8] = b"NGDBKG01";

pub fn write_stack(stack: &GraphStack) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(STORE_MAGIC);
    put_u32(&mut buf, stack.entities.len() as u32);
    put_u32(&mut buf, stack.relations.len() as u32);
    let layers = [&stack.train, &stack.valid, &stack.test];
    for g in layers {
        put_u32(&mut buf, g.len() as u32);
    }
    for g in layers {
        for t in g.triples() {
            put_u32(&mut buf, t.head);
            put_u32(&mut buf, t.relation);
            put_u32(&mut buf, t.tail);
        }
    }
    for dict in [&stack.entities, &stack.relations] {
        for name in dict.names() {
            put_u32(&mut buf, name.len() as u32);
            buf.extend_from_slice(name.as_bytes());
        }
    }
    buf
}

pub fn read_stack(bytes: &[u8]) -> Result<GraphStack> {
    let mut r = Reader::new(bytes);
    r.expect_magic(STORE_MAGIC)?;
    let ne = r.u32()? as usize;
    let nr = r.u32()? as usize;
    let counts = [r.u32()? as usize, r.u32()? as usize, r.u32()? as usize];
    let mut layers = Vec::with_capacity(3);
    for &n in &counts {
        let mut triples = Vec::with_capacity(n.min(bytes.len() / 12));
        for _ in 0..n {
            triples.push(Triple::new(r.u32()?, r.u32()?, r.u32()?));
        }
        let g = KnowledgeGraph::new(ne, nr, triples).map_err(|e| Error::Format(e.to_string()))?;
        if g.len() != n {
            return Err(Error::Format("duplicate triples in stored layer".into()));
        }
        layers.push(std::sync::Arc::new(g));
    }
    let mut dicts = Vec::with_capacity(2);
    for n in [ne, nr] {
        let mut names = Vec::with_capacity(n.min(bytes.len()));
        for _ in 0..n {
            let len = r.u32()? as usize;
            let raw = r.take(len)?;
            let name = std::str::from_utf8(raw)
                .map_err(|e| Error::Format(format!("dictionary entry is not UTF-8: {e}")))?;
            names.push(name.to_owned());
        }
        dicts.push(Dictionary::from_names(names)?);
    }
    r.finish()?;
    let relations = dicts.pop().unwrap_or_default();
    let entities = dicts.pop().unwrap_or_default();
    let test = layers.pop().unwrap();
    let valid = layers.pop().unwrap();
    let train = layers.pop().unwrap();
    let stack = GraphStack {
        entities,
        relations,
        train,
        valid,
        test,
    };
    stack.validate().map_err(|e| Error::Format(e.to_string()))?;
    Ok(stack)
}

pub fn save_stack(stack: &GraphStack, path: &Path) -> Result<()> {
    fs::write(path, write_stack(stack))?;
    Ok(())
}

pub fn load_stack(path: &Path) -> Result<GraphStack> {
    read_stack(&fs::read(path).map_err(crate::error::io_at(path))?)
}
