#pragma once
// Reference prompt blocks, written out by hand, that the renderer must
// reproduce byte for byte from the first shot of each bank.

namespace simgrag::test {

inline constexpr const char* kKgqaPatternShot = R"(1. query: "the actor in Flashpoint also appears in which films"
    output: {
        "divided": [
            "the actor in Flashpoint",
            "this actor also appears in another films",
        ],
        "triples": [
            ("UNKNOWN actor 1", "actor of", "Flashpoint"),
            ("UNKNOWN actor 1", "actor of", "UNKNOWN film 1"),
        ]
    })";

inline constexpr const char* kKgqaAnswerShot = R"(1. query: "who wrote films that share actors with the film Anastasia?"
    evidences: {
        "graph [1]": [
            ("Anastasia", "starred_actors", "Ingrid Bergman"),
            ("Spellbound", "starred_actors", "Ingrid Bergman"),
            ("Spellbound", "written_by", "Ben Hecht"),
        ],
        "graph [2]": [
            ("Anastasia", "starred_actors", "John Cusack"),
            ("Floundering", "starred_actors", "John Cusack"),
            ("Floundering", "written_by", "Peter McCarthy"),
        ]
    }
    answer: According to graphs [1][2], the writter is Ben Hecht or Peter McCarthy.)";

inline constexpr const char* kFactkgAnswerShot = R"(1. query: "Mick Walker (footballer, born 1940) is the leader of 1993–94 Notts County F.C. season."
    evidences: {
        "graph [1]": [
            ('Mick Walker (footballer, born 1940)', 'manager', '1993–94 Notts County F.C. season'),
            ('Mick Walker (footballer, born 1940)', 'birthDate', '"1940-11-27"'),
        ],
        "graph [2]": [
            ('Mick Walker (footballer, born 1940)', 'manager', '1994–95 Notts County F.C. season'),
            ('Mick Walker (footballer, born 1940)', 'birthDate', '"1940-11-27"'),
        ]
    }
    answer: As graphs [1][2] say that Mick Walker is the manager but not the leader, the answer is False.)";

inline constexpr const char* kFactkgPatternShot =
    R"(1. query: "The College of William and Mary is the owner of the Alan B. Miller Hall, that is situated in Virginia."
    output: {
        "divided": [
            "The College of William and Mary is the owner of the Alan B. Miller Hall",
            "Alan B. Miller Hall is situated Virginia",
        ],
        "triples": [
            ("The College of William and Mary", "owner", "Alan B. Miller Hall"),
            ("Alan B. Miller Hall", "situated in", "Virginia"),
        ]
    })";

// The query-to-pattern instructions for the QA style, ending before the examples.
inline constexpr const char* kKgqaPatternInstructions =
    R"(You need to segment the given query then extract the potential knowledge graph structures.

Notes)
1). Use the original description in the query with enough context, NEVER use unspecific words like 'in', 'appear in', 'for', 'of' etc.
2). For nodes or relations that are unknown, you can use the keyword 'UNKNOWN' with a unique ID, e.g., 'UNKNOWN artist 1', 'UNKNOWN relation 1'.
3). Return the segmented query and extracted graph structures strictly following the format:
    {
        "divided": [
            "segment 1",
            ...
        ],
        "triples": [
            ("head", "relation", "tail"),
            ...
        ]
    }
4). NEVER provide extra descriptions or explanations, such as something like 'Here is the extracted knowledge graph structure'.)";

}  // namespace simgrag::test
