use super::pos::{PosTag, TaggedToken};

fn is_modifier(tag: PosTag) -> bool {
    matches!(tag, PosTag::JJ | PosTag::JJR)
}

/// Flattens noun-phrase chunks into an ordered word list.
///
/// A chunk is a maximal run `(JJ|JJR)* (NN|NNS|NNP)+`. An adjective run that
/// directly follows a chunk without starting a new one is attached to it.
/// Numbers never appear in the output.
pub fn extract_noun_phrases(tagged: &[TaggedToken]) -> Vec<String> {
    let n = tagged.len();
    let tag = |i: usize| tagged[i].tag;
    let mut words = Vec::new();
    let mut i = 0;
    while i < n {
        let mod_start = i;
        let mut j = i;
        while j < n && is_modifier(tag(j)) {
            j += 1;
        }
        if j == n || !tag(j).is_noun() {
            i = j.max(i + 1);
            continue;
        }
        let mut k = j;
        while k < n && tag(k).is_noun() {
            k += 1;
        }
        words.extend(tagged[mod_start..k].iter().map(|t| t.token.surface.clone()));

        // trailing adjectives that are not themselves the start of a chunk
        let mut m = k;
        while m < n && is_modifier(tag(m)) {
            m += 1;
        }
        if m > k && (m == n || !tag(m).is_noun()) {
            words.extend(tagged[k..m].iter().map(|t| t.token.surface.clone()));
            i = m;
        } else {
            i = k;
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{pos::Tagger, tokenize::tokenize};

    fn np(text: &str) -> Vec<String> {
        extract_noun_phrases(&Tagger::default().tag(&tokenize(text)))
    }

    #[test]
    fn battery_example() {
        assert_eq!(
            np("this phone has an awesome battery back-up of 2 hours"),
            ["phone", "awesome", "battery", "backup", "hours"]
        );
    }

    #[test]
    fn meetings_example() {
        assert_eq!(
            np("8:30 am meetings are the best way to start birthday weekend"),
            ["meetings", "way", "birthday", "weekend"]
        );
    }

    #[test]
    fn no_nouns_gives_empty_list() {
        assert!(np("go away now").is_empty());
        assert!(extract_noun_phrases(&[]).is_empty());
    }

    #[test]
    fn postposed_adjective_is_attached() {
        assert_eq!(np("phone awesome"), ["phone", "awesome"]);
        // "great" starts its own chunk here
        assert_eq!(np("phone great battery"), ["phone", "great", "battery"]);
    }

    #[test]
    fn output_is_subset_of_tokens() {
        let text = "my old laptop takes 20 minutes to boot, so fast!";
        let toks: Vec<String> = tokenize(text).into_iter().map(|t| t.surface).collect();
        for w in np(text) {
            assert!(toks.contains(&w));
        }
    }
}
