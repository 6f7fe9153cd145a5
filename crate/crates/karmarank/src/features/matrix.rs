//! Featurization of whole splits: raw extraction, per-subreddit z-score
//! normalization with train statistics, and the TSV matrix format.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::{CommentList, CorpusStore, Split};
use crate::error::{Error, Result};

use super::extract::{extract_features, AuthorIndex, FeatureContext, FeatureModels};
use super::{FeatureSchema, FeaturizedList, FeaturizedMember, NormStat, SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct FeaturizedData {
    pub schema: FeatureSchema,
    pub train: Vec<FeaturizedList>,
    pub validation: Vec<FeaturizedList>,
    pub test: Vec<FeaturizedList>,
}

impl FeaturizedData {
    pub fn part(&self, name: &str) -> &[FeaturizedList] {
        match name {
            "train" => &self.train,
            "validation" => &self.validation,
            "test" => &self.test,
            other => panic!("unknown split part {other}"),
        }
    }

    pub fn subreddits(&self) -> Vec<String> {
        let mut subs: Vec<String> = self
            .train
            .iter()
            .chain(&self.validation)
            .chain(&self.test)
            .map(|l| l.subreddit.clone())
            .collect();
        subs.sort();
        subs.dedup();
        subs
    }
}

struct RawList {
    list_id: String,
    thread_id: String,
    subreddit: String,
    members: Vec<FeaturizedMember>,
}

/// Featurizes all three split parts. Normalization statistics come from
/// the train part only; columns with zero train variance in any subreddit
/// are dropped and recorded in the schema.
pub fn featurize_splits(
    store: &CorpusStore,
    lists: &[CommentList],
    split: &Split,
    models: &FeatureModels,
) -> Result<FeaturizedData> {
    let by_id: HashMap<&str, &CommentList> = lists.iter().map(|l| (l.id.as_str(), l)).collect();
    let authors = AuthorIndex::build(store);

    let mut raw_columns: Option<Vec<super::FeatureName>> = None;
    let mut extract_part = |ids: &[String]| -> Result<Vec<RawList>> {
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let list = by_id
                .get(id.as_str())
                .ok_or_else(|| Error::Data(format!("split references unknown list {id}")))?;
            let thread = store
                .threads
                .get(&list.thread_id)
                .ok_or_else(|| Error::Data(format!("list {id} references unknown thread")))?;
            let ctx = FeatureContext {
                thread,
                list,
                models,
                authors: &authors,
            };
            let mut members = Vec::with_capacity(list.members.len());
            for mid in &list.members {
                let comment = thread
                    .comment(mid)
                    .ok_or_else(|| Error::Data(format!("list {id} references unknown comment {mid}")))?;
                let gv = extract_features(&ctx, comment)?;
                let names = gv.flat_names();
                match &raw_columns {
                    None => raw_columns = Some(names),
                    Some(cols) => {
                        if *cols != names {
                            return Err(Error::Data(format!(
                                "feature layout drifted at comment {mid} in list {id}"
                            )));
                        }
                    }
                }
                members.push(FeaturizedMember {
                    comment_id: comment.id.clone(),
                    created_utc: comment.created_utc,
                    karma: comment.karma,
                    values: gv.flat_values(),
                });
            }
            out.push(RawList {
                list_id: list.id.clone(),
                thread_id: list.thread_id.clone(),
                subreddit: list.subreddit.clone(),
                members,
            });
        }
        Ok(out)
    };

    let train_raw = extract_part(&split.train)?;
    let val_raw = extract_part(&split.validation)?;
    let test_raw = extract_part(&split.test)?;
    let columns = raw_columns.ok_or_else(|| Error::Data("no lists to featurize".into()))?;
    let n_cols = columns.len();

    // Train statistics per subreddit.
    let mut stats: BTreeMap<String, (Vec<f64>, Vec<f64>, u64)> = BTreeMap::new();
    for list in &train_raw {
        let entry = stats
            .entry(list.subreddit.clone())
            .or_insert_with(|| (vec![0.0; n_cols], vec![0.0; n_cols], 0));
        for m in &list.members {
            for (i, v) in m.values.iter().enumerate() {
                entry.0[i] += v;
            }
            entry.2 += 1;
        }
    }
    for (_, (sums, _, n)) in stats.iter_mut() {
        for s in sums.iter_mut() {
            *s /= *n as f64;
        }
    }
    for list in &train_raw {
        let entry = stats.get_mut(&list.subreddit).expect("stats entry");
        for m in &list.members {
            for (i, v) in m.values.iter().enumerate() {
                let d = v - entry.0[i];
                entry.1[i] += d * d;
            }
        }
    }
    for (_, (_, sq, n)) in stats.iter_mut() {
        for s in sq.iter_mut() {
            *s = (*s / *n as f64).sqrt();
        }
    }

    // Every subreddit seen outside train needs train statistics.
    for list in val_raw.iter().chain(&test_raw) {
        if !stats.contains_key(&list.subreddit) {
            return Err(Error::Data(format!(
                "subreddit {} has no training lists to normalize against",
                list.subreddit
            )));
        }
    }

    // Drop zero-variance columns (any subreddit).
    let mut keep = vec![true; n_cols];
    let mut dropped = Vec::new();
    for (sub, (_, stds, _)) in &stats {
        for (i, std) in stds.iter().enumerate() {
            if keep[i] && (*std == 0.0 || !std.is_finite()) {
                keep[i] = false;
                dropped.push((columns[i].clone(), sub.clone()));
                log::warn!(
                    "dropping zero-variance feature {} (subreddit {sub})",
                    columns[i]
                );
            }
        }
    }
    let kept_idx: Vec<usize> = (0..n_cols).filter(|i| keep[*i]).collect();
    if kept_idx.is_empty() {
        return Err(Error::Data("all feature columns were zero-variance".into()));
    }

    let normalization: BTreeMap<String, Vec<NormStat>> = stats
        .iter()
        .map(|(sub, (means, stds, _))| {
            (
                sub.clone(),
                kept_idx
                    .iter()
                    .map(|&i| NormStat {
                        mean: means[i],
                        std: stds[i],
                    })
                    .collect(),
            )
        })
        .collect();
    let schema = FeatureSchema {
        version: SCHEMA_VERSION,
        columns: kept_idx.iter().map(|&i| columns[i].clone()).collect(),
        dropped,
        normalization,
    };

    let normalize_part = |raw: Vec<RawList>| -> Vec<FeaturizedList> {
        raw.into_iter()
            .map(|list| {
                let st = &schema.normalization[&list.subreddit];
                let members = list
                    .members
                    .into_iter()
                    .map(|m| FeaturizedMember {
                        values: kept_idx
                            .iter()
                            .enumerate()
                            .map(|(j, &i)| (m.values[i] - st[j].mean) / st[j].std)
                            .collect(),
                        ..m
                    })
                    .collect();
                FeaturizedList {
                    list_id: list.list_id,
                    thread_id: list.thread_id,
                    subreddit: list.subreddit,
                    members,
                }
            })
            .collect()
    };

    Ok(FeaturizedData {
        train: normalize_part(train_raw),
        validation: normalize_part(val_raw),
        test: normalize_part(test_raw),
        schema,
    })
}

/// Tab-separated matrix: id columns, one feature column per schema entry
/// (named `GROUP:feature`), karma last. Floats use the shortest
/// round-trippable representation, so write/read is lossless.
pub fn write_tsv(path: &Path, schema: &FeatureSchema, lists: &[FeaturizedList]) -> Result<()> {
    let mut out = String::new();
    out.push_str("subreddit\tlist_id\tcomment_id\tcreated_utc");
    for c in &schema.columns {
        let _ = write!(out, "\t{c}");
    }
    out.push_str("\tkarma\n");
    for l in lists {
        for m in &l.members {
            let _ = write!(
                out,
                "{}\t{}\t{}\t{}",
                l.subreddit, l.list_id, m.comment_id, m.created_utc
            );
            for v in &m.values {
                let _ = write!(out, "\t{v}");
            }
            let _ = writeln!(out, "\t{}", m.karma);
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_tsv(path: &Path) -> Result<Vec<FeaturizedList>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty matrix", path.display())))?;
    let n_cols = header.split('\t').count();
    if n_cols < 6 {
        return Err(Error::Parse(format!("{}: malformed header", path.display())));
    }
    let n_features = n_cols - 5;

    let mut lists: Vec<FeaturizedList> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != n_cols {
            return Err(Error::Parse(format!(
                "{}:{}: expected {n_cols} fields, got {}",
                path.display(),
                lineno + 2,
                fields.len()
            )));
        }
        let bad = |what: &str| {
            Error::Parse(format!("{}:{}: bad {what}", path.display(), lineno + 2))
        };
        let subreddit = fields[0];
        let list_id = fields[1];
        let member = FeaturizedMember {
            comment_id: fields[2].to_string(),
            created_utc: fields[3].parse().map_err(|_| bad("created_utc"))?,
            karma: fields[n_cols - 1].parse().map_err(|_| bad("karma"))?,
            values: fields[4..4 + n_features]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad("feature value")))
                .collect::<Result<_>>()?,
        };
        match lists.last_mut() {
            Some(last) if last.list_id == list_id => last.members.push(member),
            _ => lists.push(FeaturizedList {
                list_id: list_id.to_string(),
                thread_id: list_id.split(':').next().unwrap_or(list_id).to_string(),
                subreddit: subreddit.to_string(),
                members: vec![member],
            }),
        }
    }
    Ok(lists)
}
