//! Fixed word lists: English function words and American→British noun
//! spellings.

const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at", "be",
    "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could", "did", "do",
    "does", "doing", "down", "during", "each", "either", "else", "ever", "every", "few", "for", "from", "further",
    "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "however",
    "i", "if", "in", "into", "is", "it", "its", "itself", "just", "let", "may", "me", "might", "mine", "more", "most",
    "much", "must", "my", "myself", "neither", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or",
    "other", "ought", "our", "ours", "ourselves", "out", "over", "own", "same", "shall", "she", "should", "so",
    "some", "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they",
    "this", "those", "through", "thus", "to", "too", "under", "until", "up", "upon", "us", "very", "via", "was", "we",
    "were", "what", "when", "where", "whether", "which", "while", "who", "whom", "whose", "why", "will", "with",
    "within", "without", "would", "yet", "you", "your", "yours", "yourself", "yourselves", "also", "although",
    "among", "another", "around", "across", "along", "anyone", "anything", "everyone", "everything", "someone",
    "something", "whoever", "whatever", "onto", "toward", "towards", "per", "s", "'s",
];

pub fn is_stopword(word: &str) -> bool {
    STOPWORDS.contains(&word)
}

pub fn stopwords() -> &'static [&'static str] {
    STOPWORDS
}

// Nouns only; words with a different British meaning (tire, check, program)
// are left out.
const AMERICAN_BRITISH: &[(&str, &str)] = &[
    ("aluminum", "aluminium"),
    ("analog", "analogue"),
    ("armor", "armour"),
    ("behavior", "behaviour"),
    ("caliber", "calibre"),
    ("canceling", "cancelling"),
    ("catalog", "catalogue"),
    ("center", "centre"),
    ("color", "colour"),
    ("counseling", "counselling"),
    ("counselor", "counsellor"),
    ("defense", "defence"),
    ("dialog", "dialogue"),
    ("endeavor", "endeavour"),
    ("enrollment", "enrolment"),
    ("favor", "favour"),
    ("favorite", "favourite"),
    ("fiber", "fibre"),
    ("flavor", "flavour"),
    ("fulfillment", "fulfilment"),
    ("gray", "grey"),
    ("harbor", "harbour"),
    ("honor", "honour"),
    ("humor", "humour"),
    ("installment", "instalment"),
    ("jewelry", "jewellery"),
    ("labeling", "labelling"),
    ("labor", "labour"),
    ("license", "licence"),
    ("liter", "litre"),
    ("maneuver", "manoeuvre"),
    ("modeling", "modelling"),
    ("mold", "mould"),
    ("neighbor", "neighbour"),
    ("neighborhood", "neighbourhood"),
    ("offense", "offence"),
    ("pajamas", "pyjamas"),
    ("plow", "plough"),
    ("rumor", "rumour"),
    ("savior", "saviour"),
    ("signaling", "signalling"),
    ("skeptic", "sceptic"),
    ("skepticism", "scepticism"),
    ("theater", "theatre"),
    ("traveler", "traveller"),
    ("traveling", "travelling"),
    ("vapor", "vapour"),
    ("vigor", "vigour"),
    ("yogurt", "yoghurt"),
];

/// British spelling of `word`: table lookup, then the "-ization" →
/// "-isation" rule. Unlisted words pass through.
pub fn britishize(word: &str) -> String {
    if let Ok(i) = AMERICAN_BRITISH.binary_search_by(|(us, _)| (*us).cmp(word)) {
        return AMERICAN_BRITISH[i].1.to_string();
    }
    for (us, gb) in [("izations", "isations"), ("ization", "isation")] {
        if let Some(stem) = word.strip_suffix(us) {
            if !stem.is_empty() {
                return format!("{stem}{gb}");
            }
        }
    }
    word.to_string()
}

pub fn spelling_table() -> &'static [(&'static str, &'static str)] {
    AMERICAN_BRITISH
}
