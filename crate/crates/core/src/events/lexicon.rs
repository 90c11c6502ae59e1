//! Closed-class word lists and verb morphology for the rule-based parser.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

pub const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "these", "those", "some", "any", "every", "each", "no", "another",
    "all", "both", "several", "many", "much", "few", "more", "most", "such", "either", "neither",
    "enough", "what", "which", "whose",
];

pub const POSSESSIVES: &[&str] = &["my", "your", "his", "her", "its", "our", "their"];

pub const SUBJECT_PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "there", "who", "everyone", "everybody",
    "someone", "somebody", "nobody", "noone", "anyone", "anybody",
];

pub const OBJECT_PRONOUNS: &[&str] = &[
    "me", "him", "her", "us", "them", "it", "you", "myself", "himself", "herself", "themselves",
    "ourselves", "yourself", "itself", "something", "anything", "everything", "nothing",
    "someone", "anyone", "everyone", "somebody", "anybody", "everybody", "nobody", "one",
    "mine", "yours", "hers", "ours", "theirs", "this", "that", "these", "those", "what",
];

pub const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "to", "for", "with", "from", "of", "by", "about", "into", "onto", "over",
    "under", "after", "before", "during", "through", "across", "around", "near", "behind",
    "between", "without", "within", "upon", "along", "towards", "toward", "against", "among",
    "past", "until", "off", "out", "up", "down", "inside", "outside", "beside", "beyond",
    "despite", "throughout", "via", "per", "than", "like", "except", "below", "above",
    "beneath", "underneath", "away", "back",
];

pub const COORDINATORS: &[&str] = &["and", "or", "but", "nor", "yet", "so", "then"];

pub const SUBORDINATORS: &[&str] = &[
    "when", "because", "if", "while", "although", "though", "since", "as", "once", "until",
    "whenever", "unless", "whereas", "whether", "before", "after", "so that",
];

pub const NEGATIONS: &[&str] = &["not", "n't", "never"];

pub const MODALS: &[&str] = &[
    "will", "would", "can", "could", "shall", "should", "may", "might", "must", "ca", "wo", "'ll",
    "'d",
];

pub const BE_FORMS: &[&str] = &["be", "am", "is", "are", "was", "were", "been", "being", "'m", "'re"];
pub const HAVE_FORMS: &[&str] = &["have", "has", "had", "having", "'ve"];
pub const DO_FORMS: &[&str] = &["do", "does", "did"];

pub const ADVERBS: &[&str] = &[
    "very", "really", "so", "too", "also", "just", "then", "finally", "eventually", "soon",
    "suddenly", "later", "now", "always", "often", "still", "again", "already", "even",
    "quickly", "slowly", "immediately", "almost", "only", "ever", "here", "there", "today",
    "tomorrow", "yesterday", "tonight", "home", "away", "back", "together", "instead", "once",
    "twice", "anyway", "however", "therefore", "well", "quite", "rather", "pretty", "ago",
    "sometimes", "usually", "maybe", "perhaps", "actually", "definitely", "certainly",
    "everywhere", "somewhere", "anywhere", "nowhere", "afterwards", "afterward", "meanwhile",
    "outside", "inside", "upstairs", "downstairs", "forward", "abroad", "alone", "yet",
    "hard", "late", "early", "fast", "far", "long", "first", "last", "next", "more", "most",
    "less", "least", "better", "best", "enough", "otherwise", "indeed", "either", "badly",
];

/// Verbs taking an adjectival complement.
pub const LINKING_VERBS: &[&str] = &[
    "be", "look", "seem", "feel", "become", "get", "appear", "sound", "smell", "taste", "grow",
    "stay", "remain", "turn", "go", "keep", "prove",
];

/// Verbs that commonly take a clausal complement.
pub const CLAUSAL_VERBS: &[&str] = &[
    "say", "think", "know", "realize", "realise", "believe", "hope", "wish", "notice", "find",
    "learn", "discover", "remember", "forget", "guess", "suppose", "feel", "see", "hear",
    "admit", "claim", "explain", "mention", "promise", "assume", "understand", "worry", "fear",
    "agree", "suggest", "insist", "announce", "reply", "answer", "whisper", "shout", "yell",
    "scream", "wonder", "doubt", "imagine", "pretend", "dream", "swear", "bet", "figure",
    "expect", "confirm", "report", "show", "prove", "recall", "note", "sense", "suspect", "tell",
    "decide", "ensure", "check", "sigh", "laugh", "joke", "complain", "argue", "warn",
];

pub const PHRASAL_VERBS: &[(&str, &str)] = &[
    ("give", "up"), ("pick", "up"), ("wake", "up"), ("get", "up"), ("set", "up"), ("show", "up"),
    ("end", "up"), ("look", "up"), ("clean", "up"), ("grow", "up"), ("make", "up"), ("shut", "up"),
    ("cheer", "up"), ("hang", "up"), ("fill", "up"), ("open", "up"), ("sign", "up"), ("break", "up"),
    ("catch", "up"), ("hurry", "up"), ("line", "up"), ("back", "up"), ("warm", "up"), ("mess", "up"),
    ("blow", "up"), ("light", "up"), ("pack", "up"), ("speed", "up"), ("throw", "up"), ("turn", "up"),
    ("call", "up"), ("dress", "up"), ("fix", "up"), ("stand", "up"), ("sit", "up"), ("give", "back"),
    ("shut", "down"), ("calm", "down"), ("sit", "down"), ("lie", "down"), ("slow", "down"),
    ("break", "down"), ("cut", "down"), ("turn", "down"), ("put", "down"), ("settle", "down"),
    ("lay", "down"), ("write", "down"), ("step", "down"), ("knock", "down"), ("burn", "down"),
    ("track", "down"), ("calm", "down"), ("close", "down"), ("let", "down"), ("back", "down"),
    ("turn", "out"), ("find", "out"), ("figure", "out"), ("work", "out"), ("run", "out"),
    ("check", "out"), ("hang", "out"), ("freak", "out"), ("pass", "out"), ("point", "out"),
    ("throw", "out"), ("sort", "out"), ("carry", "out"), ("stand", "out"), ("try", "out"),
    ("reach", "out"), ("help", "out"), ("give", "out"), ("pull", "out"), ("move", "out"),
    ("drop", "out"), ("sell", "out"), ("watch", "out"), ("kick", "out"), ("black", "out"),
    ("turn", "off"), ("take", "off"), ("put", "off"), ("set", "off"), ("show", "off"),
    ("pay", "off"), ("drop", "off"), ("cool", "off"), ("nod", "off"), ("doze", "off"),
    ("put", "on"), ("turn", "on"), ("try", "on"), ("take", "on"), ("hold", "on"), ("carry", "on"),
    ("move", "on"), ("log", "on"), ("come", "back"), ("go", "back"), ("get", "back"),
    ("call", "back"), ("pay", "back"), ("bring", "back"), ("take", "back"), ("throw", "away"),
    ("give", "away"), ("run", "away"), ("go", "away"), ("put", "away"), ("walk", "away"),
    ("pass", "away"), ("take", "away"), ("take", "over"), ("get", "over"), ("come", "over"),
    ("turn", "over"), ("hand", "over"), ("run", "over"), ("give", "in"), ("fill", "in"),
    ("move", "in"), ("check", "in"), ("turn", "in"), ("log", "in"), ("sign", "in"),
    ("get", "along"), ("come", "along"), ("wait", "up"), ("look", "out"), ("figure", "up"),
];

pub const PARTICLES: &[&str] = &["up", "down", "out", "off", "on", "in", "over", "back", "away", "along"];

pub const ADJECTIVES: &[&str] = &[
    "happy", "sad", "angry", "tired", "excited", "scared", "worried", "bored", "interested",
    "surprised", "shocked", "amazed", "annoyed", "disappointed", "embarrassed", "frustrated",
    "confused", "exhausted", "thrilled", "pleased", "delighted", "relieved", "terrified",
    "frightened", "nervous", "anxious", "afraid", "glad", "proud", "upset", "sorry", "lonely",
    "hungry", "thirsty", "sick", "ill", "well", "fine", "good", "bad", "great", "nice", "new",
    "old", "big", "small", "little", "large", "long", "short", "tall", "high", "low", "young",
    "beautiful", "pretty", "ugly", "cute", "lovely", "wonderful", "terrible", "awful", "horrible",
    "amazing", "perfect", "easy", "hard", "difficult", "simple", "busy", "free", "full", "empty",
    "hot", "cold", "warm", "cool", "wet", "dry", "clean", "dirty", "late", "early", "ready",
    "sure", "certain", "able", "unable", "alone", "alive", "dead", "awake", "asleep", "broken",
    "lost", "stuck", "fast", "slow", "quick", "quiet", "loud", "dark", "bright", "red", "blue",
    "green", "yellow", "black", "white", "brown", "pink", "purple", "orange", "gray", "grey",
    "rich", "poor", "strong", "weak", "heavy", "light", "safe", "dangerous", "important",
    "expensive", "cheap", "fresh", "delicious", "huge", "tiny", "strange", "weird", "funny",
    "serious", "friendly", "kind", "mean", "nice", "rude", "polite", "smart", "stupid", "crazy",
    "fun", "boring", "famous", "popular", "favorite", "favourite", "best", "better", "worse",
    "worst", "last", "next", "first", "whole", "entire", "real", "true", "false", "wrong",
    "right", "correct", "special", "different", "same", "other", "own", "local", "stray",
    "sunny", "rainy", "snowy", "windy", "cloudy", "injured", "nervous", "calm",
    "jealous", "grateful", "thankful", "curious", "eager", "furious", "miserable", "sore",
    "comfortable", "uncomfortable", "successful", "careful", "careless", "helpful", "useful",
    "healthy", "fat", "thin", "bald", "blind", "deaf", "pregnant", "married", "single",
    "excellent", "fantastic", "awesome", "nasty", "gross", "soft", "loose", "tight", "sharp",
    "flat", "deep", "wide", "narrow", "fancy", "hungry", "sleepy", "lazy", "brave", "shy",
    "honest", "lucky", "unlucky", "impressed", "satisfied", "determined", "overjoyed", "stressed",
    "sweaty", "soaked", "ruined", "gone", "done", "finished", "open", "closed", "missing",
    "whole", "ecstatic", "nice", "sweet", "sour", "bitter", "spicy", "salty", "crowded", "noisy",
];

pub const IRREGULAR_VERBS: &[(&str, &str, &str)] = &[
    ("go", "went", "gone"), ("get", "got", "gotten"), ("see", "saw", "seen"),
    ("come", "came", "come"), ("take", "took", "taken"), ("make", "made", "made"),
    ("know", "knew", "known"), ("think", "thought", "thought"), ("say", "said", "said"),
    ("tell", "told", "told"), ("give", "gave", "given"), ("find", "found", "found"),
    ("feel", "felt", "felt"), ("leave", "left", "left"), ("bring", "brought", "brought"),
    ("buy", "bought", "bought"), ("begin", "began", "begun"), ("keep", "kept", "kept"),
    ("hold", "held", "held"), ("stand", "stood", "stood"), ("run", "ran", "run"),
    ("sit", "sat", "sat"), ("lose", "lost", "lost"), ("pay", "paid", "paid"),
    ("meet", "met", "met"), ("send", "sent", "sent"), ("build", "built", "built"),
    ("fall", "fell", "fallen"), ("cut", "cut", "cut"), ("put", "put", "put"),
    ("set", "set", "set"), ("let", "let", "let"), ("hit", "hit", "hit"), ("hurt", "hurt", "hurt"),
    ("quit", "quit", "quit"), ("read", "read", "read"), ("spend", "spent", "spent"),
    ("grow", "grew", "grown"), ("draw", "drew", "drawn"), ("drive", "drove", "driven"),
    ("ride", "rode", "ridden"), ("write", "wrote", "written"), ("eat", "ate", "eaten"),
    ("drink", "drank", "drunk"), ("sing", "sang", "sung"), ("swim", "swam", "swum"),
    ("ring", "rang", "rung"), ("speak", "spoke", "spoken"), ("break", "broke", "broken"),
    ("choose", "chose", "chosen"), ("wake", "woke", "woken"), ("wear", "wore", "worn"),
    ("tear", "tore", "torn"), ("throw", "threw", "thrown"), ("fly", "flew", "flown"),
    ("forget", "forgot", "forgotten"), ("hide", "hid", "hidden"), ("bite", "bit", "bitten"),
    ("shake", "shook", "shaken"), ("steal", "stole", "stolen"), ("freeze", "froze", "frozen"),
    ("win", "won", "won"), ("sell", "sold", "sold"), ("teach", "taught", "taught"),
    ("catch", "caught", "caught"), ("fight", "fought", "fought"), ("seek", "sought", "sought"),
    ("sleep", "slept", "slept"), ("feed", "fed", "fed"), ("lead", "led", "led"),
    ("bleed", "bled", "bled"), ("hear", "heard", "heard"), ("mean", "meant", "meant"),
    ("lend", "lent", "lent"), ("bend", "bent", "bent"), ("shoot", "shot", "shot"),
    ("light", "lit", "lit"), ("slide", "slid", "slid"), ("stick", "stuck", "stuck"),
    ("strike", "struck", "struck"), ("swing", "swung", "swung"), ("hang", "hung", "hung"),
    ("dig", "dug", "dug"), ("spin", "spun", "spun"), ("understand", "understood", "understood"),
    ("become", "became", "become"), ("forgive", "forgave", "forgiven"), ("rise", "rose", "risen"),
    ("shine", "shone", "shone"), ("lay", "laid", "laid"), ("lie", "lay", "lain"),
    ("spit", "spat", "spat"), ("split", "split", "split"), ("spread", "spread", "spread"),
    ("shut", "shut", "shut"), ("cost", "cost", "cost"), ("bet", "bet", "bet"),
    ("burst", "burst", "burst"), ("fit", "fit", "fit"), ("upset", "upset", "upset"),
    ("sink", "sank", "sunk"), ("beat", "beat", "beaten"), ("blow", "blew", "blown"),
    ("show", "showed", "shown"), ("deal", "dealt", "dealt"), ("kneel", "knelt", "knelt"),
    ("weep", "wept", "wept"), ("sweep", "swept", "swept"), ("creep", "crept", "crept"),
    ("mistake", "mistook", "mistaken"), ("overcome", "overcame", "overcome"),
    ("withdraw", "withdrew", "withdrawn"), ("undertake", "undertook", "undertaken"),
    ("feed", "fed", "fed"), ("flee", "fled", "fled"), ("sting", "stung", "stung"),
    ("swear", "swore", "sworn"), ("bear", "bore", "born"), ("bind", "bound", "bound"),
    ("grind", "ground", "ground"), ("wind", "wound", "wound"), ("dive", "dove", "dived"),
    ("oversleep", "overslept", "overslept"), ("overhear", "overheard", "overheard"),
    ("have", "had", "had"), ("do", "did", "done"), ("be", "was", "been"),
];

pub const REGULAR_VERBS: &[&str] = &[
    "accept", "add", "admire", "admit", "adopt", "advise", "agree", "allow", "announce",
    "answer", "apologize", "appear", "apply", "arrange", "arrest", "arrive", "ask", "attack",
    "attempt", "attend", "avoid", "bake", "bark", "beg", "behave", "believe", "belong", "block",
    "boil", "book", "borrow", "bother", "bounce", "brush", "bump", "burn", "call", "calm",
    "camp", "care", "carry", "cause", "celebrate", "change", "charge", "chase", "chat",
    "cheat", "check", "cheer", "chew", "chop", "clap", "clean", "clear", "climb", "close",
    "collect", "comb", "compete", "complain", "complete", "confess", "confirm", "consider",
    "contain", "continue", "cook", "copy", "correct", "cough", "count", "cover", "crash",
    "crawl", "cross", "crush", "cry", "cure", "dance", "dare", "decide", "decorate", "delay",
    "deliver", "deny", "depend", "describe", "deserve", "destroy", "die", "disappear",
    "discover", "dislike", "divide", "donate", "doubt", "drag", "dream", "dress", "drop",
    "dry", "earn", "embarrass", "employ", "empty", "encourage", "end", "enjoy", "enter",
    "escape", "examine", "excite", "excuse", "exercise", "exist", "expect", "explain",
    "explode", "explore", "face", "fail", "fear", "fetch", "file", "fill", "finish", "fix",
    "float", "flood", "follow", "force", "form", "gather", "gaze", "glance", "grab", "greet",
    "guess", "guide", "hammer", "hand", "handle", "happen", "harm", "hate", "head", "heat",
    "help", "hike", "hire", "hop", "hope", "hug", "hunt", "hurry", "ignore", "imagine",
    "impress", "improve", "include", "inform", "insist", "inspect", "install", "intend",
    "interrupt", "introduce", "invent", "invite", "iron", "jog", "join", "joke", "judge",
    "jump", "kick", "kill", "kiss", "knock", "land", "last", "laugh", "learn", "lick", "like",
    "list", "listen", "live", "load", "lock", "look", "love", "manage", "mark", "marry",
    "match", "matter", "measure", "melt", "mention", "mind", "miss", "mix", "move", "need",
    "nod", "note", "notice", "obey", "offer", "open", "order", "own", "pack", "paint", "park",
    "pass", "pause", "peel", "perform", "phone", "pick", "place", "plan", "plant", "play",
    "please", "point", "pour", "practice", "practise", "pray", "prefer", "prepare", "present",
    "press", "pretend", "prevent", "print", "promise", "protect", "provide", "pull", "pump",
    "punch", "punish", "push", "question", "race", "rain", "raise", "reach", "realize",
    "realise", "receive", "recognize", "recommend", "record", "refuse", "regret", "relax",
    "release", "remain", "remember", "remind", "remove", "rent", "repair", "repeat", "replace",
    "reply", "report", "request", "rescue", "rest", "retire", "return", "rinse", "risk", "rob",
    "rock", "roll", "rub", "ruin", "rush", "sail", "save", "scare", "scream", "search",
    "serve", "settle", "share", "shave", "shop", "shout", "sign", "sip", "skate", "ski",
    "skip", "slip", "smell", "smile", "smoke", "sneak", "sneeze", "snow", "sound", "spell",
    "spill", "spoil", "spray", "squeeze", "stare", "start", "stay", "step", "stop", "store",
    "study", "stuff", "succeed", "suffer", "suggest", "supply", "support", "suppose",
    "surprise", "surround", "survive", "suspect", "swallow", "talk", "tap", "taste", "text",
    "thank", "tick", "tie", "tip", "tire", "touch", "tour", "tow", "trace", "train", "trap",
    "travel", "treat", "trip", "trust", "try", "turn", "type", "unlock", "unpack", "use",
    "vanish", "visit", "vote", "wait", "walk", "wander", "want", "warn", "wash", "waste",
    "watch", "water", "wave", "welcome", "whisper", "wink", "wipe", "wish", "wonder", "work",
    "worry", "wrap", "yawn", "yell", "zip", "adore", "bathe", "beep", "blame", "bless",
    "boast", "bolt", "bore", "bow", "brake", "breathe", "buzz", "calculate", "challenge",
    "choke", "coach", "compare", "concentrate", "concern", "connect", "crack", "cycle",
    "damage", "decay", "detect", "develop", "disagree", "disapprove", "drown", "drum",
    "educate", "entertain", "fade", "fancy", "fasten", "fax", "fence", "fire", "flash", "flap",
    "flow", "flower", "fold", "fry", "glow", "glue", "grate", "grease", "grin", "grip", "groan",
    "guarantee", "hang", "harass", "haunt", "heal", "hover", "identify", "increase",
    "influence", "inject", "instruct", "interest", "irritate", "itch", "jail", "jam", "juggle",
    "kneel", "knit", "label", "launch", "level", "license", "lighten", "man", "memorize",
    "milk", "moan", "mourn", "mug", "multiply", "nail", "nest", "number", "object", "observe",
    "obtain", "occur", "overflow", "pat", "peck", "pedal", "permit", "pinch", "pine", "plug",
    "polish", "possess", "post", "preach", "precede", "produce", "program", "propose",
    "puncture", "queue", "quiz", "radiate", "reflect", "reign", "reject", "rejoice", "rely",
    "risk", "rot", "rule", "satisfy", "scatter", "scold", "scorch", "scrape", "scratch",
    "screw", "scribble", "scrub", "seal", "shelter", "shiver", "shock", "sigh", "sin", "sketch",
    "slap", "slow", "smash", "snatch", "sniff", "snore", "soothe", "spare", "spark", "sparkle",
    "spot", "sprout", "squash", "squeak", "squeal", "stamp", "steer", "stitch", "strap",
    "strengthen", "stretch", "strip", "stroke", "subtract", "suck", "suit", "switch", "tame",
    "tease", "telephone", "tempt", "terrify", "test", "thaw", "tickle", "time", "tour",
    "transport", "tremble", "trot", "trouble", "tug", "tumble", "twist", "undress", "unfasten",
    "unite", "untidy", "vex", "wail", "wander", "warm", "weigh", "whine", "whip", "whirl",
    "whistle", "wobble", "wreck", "wrestle", "wriggle", "x-ray", "yell", "zoom", "graduate", "name", "score", "leak", "lend",
    "volunteer", "babysit", "text", "email", "download", "upload", "google", "tweet", "snap",
    "order", "drift", "buckle", "sprint", "stumble", "sob", "pout", "blink", "frown", "giggle",
    "chuckle", "sneak", "tiptoe", "shrug", "glare", "peek", "recover", "qualify", "cancel",
    "purchase", "afford", "invest", "repay", "lend", "owe", "bid", "hesitate", "focus",
    "struggle", "manage", "achieve", "attach", "adjust", "apologise", "appreciate", "approach",
    "argue", "assume", "attract", "awake", "bury", "cease", "claim", "clutch", "compose",
    "convince", "create", "dash", "dine", "disturb", "dump", "dust", "enroll", "ensure",
    "expand", "feature", "film", "fish", "gain", "gamble", "greet", "hunt", "investigate",
    "involve", "kidnap", "lift", "limp", "mow", "murder", "nap", "overreact", "panic", "pet",
    "picnic", "plead", "prank", "predict", "pursue", "quarrel", "rake", "rebuild", "recycle",
    "reduce", "rehearse", "reveal", "review", "reward", "roast", "rely", "sew", "shower",
    "shuffle", "sled", "slam", "slice", "snack", "solve", "sort", "spy", "stack", "star",
    "starve", "steam", "strive", "sue", "sunbathe", "surf", "swap", "tackle", "tan", "tidy",
    "toast", "trade", "transfer", "trick", "tutor", "unplug", "update", "upgrade", "vacuum",
    "wed", "worship", "interview", "pose", "market", "audition", "scream", "splash", "stroll",
    "yank", "poke", "pop", "freak", "nod", "doze", "figure",
];

/// Grammatical form of a verb token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VerbForm {
    Base,
    Third,
    Past,
    Participle,
    PastOrParticiple,
    Gerund,
}

struct Lexicon {
    verbs: HashSet<&'static str>,
    irregular: HashMap<&'static str, (&'static str, VerbForm)>,
    adjectives: HashSet<&'static str>,
    phrasal: HashSet<(&'static str, &'static str)>,
}

fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| {
        let mut verbs: HashSet<&'static str> = REGULAR_VERBS.iter().copied().collect();
        let mut irregular = HashMap::new();
        for &(base, past, part) in IRREGULAR_VERBS {
            verbs.insert(base);
            if past == part {
                irregular.insert(past, (base, VerbForm::PastOrParticiple));
            } else {
                irregular.insert(past, (base, VerbForm::Past));
                irregular.insert(part, (base, VerbForm::Participle));
            }
        }
        // "got" doubles as a participle
        irregular.insert("got", ("get", VerbForm::PastOrParticiple));
        Lexicon {
            verbs,
            irregular,
            adjectives: ADJECTIVES.iter().copied().collect(),
            phrasal: PHRASAL_VERBS.iter().copied().collect(),
        }
    })
}

pub fn is_verb_lemma(word: &str) -> bool {
    lexicon().verbs.contains(word)
}

pub fn is_adjective(word: &str) -> bool {
    let lex = lexicon();
    if lex.adjectives.contains(word) {
        return true;
    }
    let suffixed = ["ful", "ous", "less", "able", "ible", "ive", "ish"]
        .iter()
        .any(|s| word.len() > s.len() + 2 && word.ends_with(s));
    suffixed && !lex.verbs.contains(word)
}

pub fn is_phrasal(lemma: &str, particle: &str) -> bool {
    lexicon().phrasal.contains(&(lemma, particle))
}

/// Analyse a lowercase word as a verb form, returning its lemma.
pub fn analyze_verb(word: &str) -> Option<(String, VerbForm)> {
    let lex = lexicon();
    if let Some(&(base, form)) = lex.irregular.get(word) {
        // irregular bases such as "run" or "come" coincide with participles
        if lex.verbs.contains(word) && base == word {
            return Some((base.to_string(), VerbForm::Base));
        }
        return Some((base.to_string(), form));
    }
    if lex.verbs.contains(word) {
        return Some((word.to_string(), VerbForm::Base));
    }
    let try_stems = |stem: &str, form: VerbForm| -> Option<(String, VerbForm)> {
        let mut candidates = vec![stem.to_string(), format!("{stem}e")];
        let b = stem.as_bytes();
        if b.len() >= 2 && b[b.len() - 1] == b[b.len() - 2] {
            candidates.push(stem[..stem.len() - 1].to_string());
        }
        candidates
            .into_iter()
            .find(|c| lex.verbs.contains(c.as_str()))
            .map(|c| (c, form))
    };
    if let Some(stem) = word.strip_suffix("ied") {
        let c = format!("{stem}y");
        if lex.verbs.contains(c.as_str()) {
            return Some((c, VerbForm::PastOrParticiple));
        }
    }
    if let Some(stem) = word.strip_suffix("ed") {
        if let Some(hit) = try_stems(stem, VerbForm::PastOrParticiple) {
            return Some(hit);
        }
    }
    if let Some(stem) = word.strip_suffix("ing") {
        if let Some(hit) = try_stems(stem, VerbForm::Gerund) {
            return Some(hit);
        }
        // dying, lying, tying
        if let Some(s) = stem.strip_suffix('y') {
            let c = format!("{s}ie");
            if lex.verbs.contains(c.as_str()) {
                return Some((c, VerbForm::Gerund));
            }
        }
    }
    if let Some(stem) = word.strip_suffix("ies") {
        let c = format!("{stem}y");
        if lex.verbs.contains(c.as_str()) {
            return Some((c, VerbForm::Third));
        }
    }
    if let Some(stem) = word.strip_suffix("es") {
        if lex.verbs.contains(stem) {
            return Some((stem.to_string(), VerbForm::Third));
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        if lex.verbs.contains(stem) {
            return Some((stem.to_string(), VerbForm::Third));
        }
    }
    None
}

/// Lemma for auxiliary forms.
pub fn aux_lemma(word: &str) -> Option<&'static str> {
    if BE_FORMS.contains(&word) {
        Some("be")
    } else if HAVE_FORMS.contains(&word) {
        Some("have")
    } else if DO_FORMS.contains(&word) {
        Some("do")
    } else if MODALS.contains(&word) {
        Some(match word {
            "ca" => "can",
            "wo" | "'ll" => "will",
            "'d" => "would",
            other => MODALS.iter().copied().find(|m| *m == other).unwrap_or("will"),
        })
    } else {
        None
    }
}

pub fn noun_lemma(word: &str) -> String {
    if word.len() > 3 && word.ends_with("ies") {
        format!("{}y", &word[..word.len() - 3])
    } else if word.len() > 3 && word.ends_with('s') && !word.ends_with("ss") && !word.ends_with("us") {
        word[..word.len() - 1].to_string()
    } else {
        word.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_morphology() {
        assert_eq!(analyze_verb("needed"), Some(("need".into(), VerbForm::PastOrParticiple)));
        assert_eq!(analyze_verb("stopped"), Some(("stop".into(), VerbForm::PastOrParticiple)));
        assert_eq!(analyze_verb("decided"), Some(("decide".into(), VerbForm::PastOrParticiple)));
        assert_eq!(analyze_verb("tried"), Some(("try".into(), VerbForm::PastOrParticiple)));
        assert_eq!(analyze_verb("turns"), Some(("turn".into(), VerbForm::Third)));
        assert_eq!(analyze_verb("notices"), Some(("notice".into(), VerbForm::Third)));
        assert_eq!(analyze_verb("went"), Some(("go".into(), VerbForm::Past)));
        assert_eq!(analyze_verb("run"), Some(("run".into(), VerbForm::Base)));
        assert_eq!(analyze_verb("running"), Some(("run".into(), VerbForm::Gerund)));
        assert_eq!(analyze_verb("making"), Some(("make".into(), VerbForm::Gerund)));
        assert_eq!(analyze_verb("lost"), Some(("lose".into(), VerbForm::PastOrParticiple)));
        assert_eq!(analyze_verb("table"), None);
    }

    #[test]
    fn phrasal_pairs() {
        assert!(is_phrasal("shut", "down"));
        assert!(is_phrasal("turn", "out"));
        assert!(!is_phrasal("walk", "down"));
    }
}
