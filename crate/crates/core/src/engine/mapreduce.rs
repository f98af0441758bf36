//! Single-process map / shuffle / reduce.

use std::collections::BTreeMap;

/// Collects `(key, value)` pairs emitted by a map function.
pub struct Emitter<K, V> {
    pairs: Vec<(K, V)>,
}

impl<K, V> Emitter<K, V> {
    pub fn emit(&mut self, key: K, value: V) {
        self.pairs.push((key, value));
    }
}

/// Runs `map` over every input, groups the emitted values by key and applies
/// `reduce` to each group.
///
/// Values reach `reduce` in emission order, and groups come out in key order,
/// so the result is deterministic for a deterministic input order.
pub fn map_reduce<I, K, V, O, M, R>(inputs: I, mut map: M, mut reduce: R) -> Vec<(K, O)>
where
    I: IntoIterator,
    K: Ord,
    M: FnMut(I::Item, &mut Emitter<K, V>),
    R: FnMut(&K, &[V]) -> O,
{
    let mut emitter = Emitter { pairs: Vec::new() };
    for input in inputs {
        map(input, &mut emitter);
    }

    let mut shuffled: BTreeMap<K, Vec<V>> = BTreeMap::new();
    for (key, value) in emitter.pairs {
        shuffled.entry(key).or_default().push(value);
    }

    shuffled
        .into_iter()
        .map(|(key, values)| {
            let out = reduce(&key, &values);
            (key, out)
        })
        .collect()
}
