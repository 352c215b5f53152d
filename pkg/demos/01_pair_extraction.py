"""
From a dependency treebank to adjective-noun pair counts
========================================================

Walks through the first pipeline stage: parse CoNLL-U text, keep the
adjectives that modify inanimate nouns from a lexicon, and resolve each
noun's grammatical gender by majority vote over its treebank annotations.
"""

import io

from cgmi import (
    GenderInventory,
    InanimateLexicon,
    corpus_stats,
    extract_pairs,
    parse_conllu,
    write_pairs_tsv,
)
from cgmi.extraction import ExtractionTally

# A miniature Spanish treebank.  Sentence 3 has an animate noun, sentence
# 4 a noun the annotator left without a Gender feature; both are dropped
# for different reasons and the tally below says which.
CORPUS = """\
# text = La mesa roja brilla.
1	La	el	DET	_	Definite=Def|Gender=Fem	2	det	_	_
2	mesa	mesa	NOUN	_	Gender=Fem|Number=Sing	4	nsubj	_	_
3	roja	rojo	ADJ	_	Gender=Fem	2	amod	_	_
4	brilla	brillar	VERB	_	_	0	root	_	_

# text = El cuchillo viejo corta.
1	El	el	DET	_	Definite=Def|Gender=Masc	2	det	_	_
2	cuchillo	cuchillo	NOUN	_	Gender=Masc	4	nsubj	_	_
3	viejo	viejo	ADJ	_	Gender=Masc	2	amod	_	_
4	corta	cortar	VERB	_	_	0	root	_	_

# text = Una persona amable llega.
1	Una	uno	DET	_	Gender=Fem	2	det	_	_
2	persona	persona	NOUN	_	Gender=Fem	4	nsubj	_	_
3	amable	amable	ADJ	_	_	2	amod	_	_
4	llega	llegar	VERB	_	_	0	root	_	_

# text = El problema grave persiste.
1	El	el	DET	_	Definite=Def|Gender=Masc	2	det	_	_
2	problema	problema	NOUN	_	Number=Sing	4	nsubj	_	_
3	grave	grave	ADJ	_	_	2	amod	_	_
4	persiste	persistir	VERB	_	_	0	root	_	_

# text = La mesa limpia brilla.
1	La	el	DET	_	Definite=Def|Gender=Fem	2	det	_	_
2	mesa	mesa	NOUN	_	Gender=Fem	4	nsubj	_	_
3	limpia	limpio	ADJ	_	Gender=Fem	2	amod	_	_
4	brilla	brillar	VERB	_	_	0	root	_	_
"""

# Step 1: parse.  parse_conllu accepts text, bytes, paths, or streams.
sentences = list(parse_conllu(CORPUS))
print(f"parsed {len(sentences)} sentences")

# Step 2: decide which nouns count as inanimate.  Real runs load this
# from a lemma list file; 'persona' is deliberately absent.
lexicon = InanimateLexicon.from_lemmas(["mesa", "cuchillo", "problema"])
inventory = GenderInventory.for_language("es")
print(f"gender inventory for es: {inventory.labels}")

# Step 3: extract.  The tally records why candidate pairs were dropped.
tally = ExtractionTally()
pairs = extract_pairs(sentences, lexicon, inventory, tally)

print("\npair counts:")
for (noun, adjective), count in sorted(pairs.entries.items()):
    gender = pairs.noun_gender[noun]
    print(f"  {noun} ({gender}) <- {adjective}  x{count}")

print("\ndrop tally:", tally.as_dict())

stats = corpus_stats(pairs)
print("corpus stats:", stats.as_dict())

# Step 4: serialize for the next stage.  The CLI equivalent is
# `cgmi extract --language es --lexicon nouns.txt corpus.conllu out/`.
buffer = io.StringIO()
write_pairs_tsv(pairs, buffer)
print("\npairs.tsv:")
print(buffer.getvalue())
