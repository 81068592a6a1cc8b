use std::collections::HashMap;

use crate::error::{check_bounds, Error, Result};

/// Bijective map between surface strings and dense ids, in first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut dict = Dictionary::new();
        for name in names {
            let name = name.into();
            if dict.ids.contains_key(&name) {
                return Err(Error::Format(format!("duplicate dictionary entry `{name}`")));
            }
            dict.get_or_insert(&name);
        }
        Ok(dict)
    }

    pub fn get_or_insert(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(name.to_owned(), id);
        self.names.push(name.to_owned());
        id
    }

    pub fn encode(&self, name: &str) -> Option<u32> {
        self.ids.get(name).copied()
    }

    pub fn decode(&self, id: u32) -> Result<&str> {
        check_bounds("dictionary", id as usize, self.names.len())?;
        Ok(&self.names[id as usize])
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}
