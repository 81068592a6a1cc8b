use std::fs;
use std::path::Path;

use crate::binio::{put_f32s, put_u32, Reader};
use crate::error::{check_bounds, Error, Result};
use crate::kg::{EntityId, KnowledgeGraph, RelationId};

pub const EMBEDDING_MAGIC: &[u8; 8] = b"NGDBEMB1";

/// ComplEx embeddings: real and imaginary parts stored row-major, `dim` per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    num_entities: usize,
    num_relations: usize,
    dim: usize,
    entity_re: Vec<f32>,
    entity_im: Vec<f32>,
    relation_re: Vec<f32>,
    relation_im: Vec<f32>,
    /// Median training-positive score per relation, used to centre calibration.
    relation_medians: Vec<f32>,
}

impl EmbeddingTable {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        num_entities: usize,
        num_relations: usize,
        dim: usize,
        entity_re: Vec<f32>,
        entity_im: Vec<f32>,
        relation_re: Vec<f32>,
        relation_im: Vec<f32>,
        relation_medians: Vec<f32>,
    ) -> Result<Self> {
        let ent = num_entities * dim;
        let rel = num_relations * dim;
        if dim == 0
            || entity_re.len() != ent
            || entity_im.len() != ent
            || relation_re.len() != rel
            || relation_im.len() != rel
            || relation_medians.len() != num_relations
        {
            return Err(Error::InvalidState(format!(
                "embedding arrays do not match |E|={num_entities}, |R|={num_relations}, d={dim}"
            )));
        }
        Ok(EmbeddingTable {
            num_entities,
            num_relations,
            dim,
            entity_re,
            entity_im,
            relation_re,
            relation_im,
            relation_medians,
        })
    }

    pub fn zeros(num_entities: usize, num_relations: usize, dim: usize) -> Result<Self> {
        Self::from_parts(
            num_entities,
            num_relations,
            dim,
            vec![0.0; num_entities * dim],
            vec![0.0; num_entities * dim],
            vec![0.0; num_relations * dim],
            vec![0.0; num_relations * dim],
            vec![0.0; num_relations],
        )
    }

    pub fn num_entities(&self) -> usize {
        self.num_entities
    }

    pub fn num_relations(&self) -> usize {
        self.num_relations
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity(&self, e: EntityId) -> (&[f32], &[f32]) {
        let range = e as usize * self.dim..(e as usize + 1) * self.dim;
        (&self.entity_re[range.clone()], &self.entity_im[range])
    }

    pub fn relation(&self, r: RelationId) -> (&[f32], &[f32]) {
        let range = r as usize * self.dim..(r as usize + 1) * self.dim;
        (&self.relation_re[range.clone()], &self.relation_im[range])
    }

    pub fn entity_mut(&mut self, e: EntityId) -> (&mut [f32], &mut [f32]) {
        let range = e as usize * self.dim..(e as usize + 1) * self.dim;
        (&mut self.entity_re[range.clone()], &mut self.entity_im[range])
    }

    pub fn relation_mut(&mut self, r: RelationId) -> (&mut [f32], &mut [f32]) {
        let range = r as usize * self.dim..(r as usize + 1) * self.dim;
        (&mut self.relation_re[range.clone()], &mut self.relation_im[range])
    }

    pub fn relation_median(&self, r: RelationId) -> f64 {
        self.relation_medians[r as usize] as f64
    }

    pub fn relation_medians(&self) -> &[f32] {
        &self.relation_medians
    }

    pub fn set_relation_medians(&mut self, medians: Vec<f32>) -> Result<()> {
        if medians.len() != self.num_relations {
            return Err(Error::InvalidState("one median per relation expected".into()));
        }
        self.relation_medians = medians;
        Ok(())
    }

    /// `Re(Σ_k h_k · r_k · conj(t_k))`.
    pub fn score(&self, head: EntityId, relation: RelationId, tail: EntityId) -> Result<f64> {
        check_bounds("entity", head as usize, self.num_entities)?;
        check_bounds("entity", tail as usize, self.num_entities)?;
        check_bounds("relation", relation as usize, self.num_relations)?;
        Ok(self.score_unchecked(head, relation, tail))
    }

    pub(crate) fn score_unchecked(&self, head: EntityId, relation: RelationId, tail: EntityId) -> f64 {
        let query = self.query_vector(head, relation);
        let (tr, ti) = self.entity(tail);
        dot_query(&query, tr, ti)
    }

    /// `h ∘ r` as interleaved real/imaginary halves.
    fn query_vector(&self, head: EntityId, relation: RelationId) -> Vec<f64> {
        let (hr, hi) = self.entity(head);
        let (rr, ri) = self.relation(relation);
        let d = self.dim;
        let mut q = vec![0.0; 2 * d];
        for k in 0..d {
            let (hr, hi, rr, ri) = (hr[k] as f64, hi[k] as f64, rr[k] as f64, ri[k] as f64);
            q[k] = hr * rr - hi * ri;
            q[d + k] = hr * ri + hi * rr;
        }
        q
    }

    /// Scores of `(head, relation, t)` for every tail `t`.
    pub fn score_tails(&self, head: EntityId, relation: RelationId) -> Result<Vec<f64>> {
        check_bounds("entity", head as usize, self.num_entities)?;
        check_bounds("relation", relation as usize, self.num_relations)?;
        let query = self.query_vector(head, relation);
        Ok((0..self.num_entities as EntityId)
            .map(|t| {
                let (tr, ti) = self.entity(t);
                dot_query(&query, tr, ti)
            })
            .collect())
    }

    /// Median training-positive score per relation; relations without
    /// positives fall back to the global median.
    pub fn fit_relation_medians(&mut self, train: &KnowledgeGraph) -> Result<()> {
        if train.num_entities() != self.num_entities || train.num_relations() != self.num_relations {
            return Err(Error::InvalidState("graph and embedding vocabularies differ".into()));
        }
        let mut per_relation: Vec<Vec<f64>> = vec![Vec::new(); self.num_relations];
        for t in train.triples() {
            per_relation[t.relation as usize].push(self.score_unchecked(t.head, t.relation, t.tail));
        }
        let mut all: Vec<f64> = per_relation.iter().flatten().copied().collect();
        let global = median(&mut all).unwrap_or(0.0);
        let medians = per_relation
            .iter_mut()
            .enumerate()
            .map(|(r, scores)| {
                median(scores).unwrap_or_else(|| {
                    log::warn!("relation {r} has no training positives; using global median");
                    global
                }) as f32
            })
            .collect();
        self.relation_medians = medians;
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        [&self.entity_re, &self.entity_im, &self.relation_re, &self.relation_im]
            .iter()
            .all(|v| v.iter().all(|x| x.is_finite()))
    }

    /// Binary layout: magic, u32 `(|E|, |R|, d)`, f32 entity-real, entity-imag,
    /// relation-real, relation-imag, then one f32 median per relation.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(20 + 4 * (2 * self.entity_re.len() + 2 * self.relation_re.len() + self.num_relations));
        buf.extend_from_slice(EMBEDDING_MAGIC);
        put_u32(&mut buf, self.num_entities as u32);
        put_u32(&mut buf, self.num_relations as u32);
        put_u32(&mut buf, self.dim as u32);
        for part in [&self.entity_re, &self.entity_im, &self.relation_re, &self.relation_im] {
            put_f32s(&mut buf, part);
        }
        put_f32s(&mut buf, &self.relation_medians);
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        r.expect_magic(EMBEDDING_MAGIC)?;
        let ne = r.u32()? as usize;
        let nr = r.u32()? as usize;
        let dim = r.u32()? as usize;
        let ent = ne.checked_mul(dim).ok_or_else(|| Error::Format("size overflow".into()))?;
        let rel = nr.checked_mul(dim).ok_or_else(|| Error::Format("size overflow".into()))?;
        let entity_re = r.f32s(ent)?;
        let entity_im = r.f32s(ent)?;
        let relation_re = r.f32s(rel)?;
        let relation_im = r.f32s(rel)?;
        let medians = r.f32s(nr)?;
        r.finish()?;
        Self::from_parts(ne, nr, dim, entity_re, entity_im, relation_re, relation_im, medians)
            .map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(crate::error::io_at(path))?)
    }
}

fn dot_query(query: &[f64], tr: &[f32], ti: &[f32]) -> f64 {
    let d = tr.len();
    let mut s = 0.0;
    for k in 0..d {
        s += query[k] * tr[k] as f64 + query[d + k] * ti[k] as f64;
    }
    s
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}
