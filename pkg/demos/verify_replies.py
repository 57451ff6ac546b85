"""Check circle-relation replies and print the feedback a prompt would get.

The statements below are satisfiable.  The first reply describes each
statement faithfully but the three relations cannot hold together.  The
second declines, which is wrong.  The third draws a possible arrangement
but writes the "all" statement with its circles swapped, so it passes only
under the lenient reading that ignores argument order.
"""
from sphnn.syllogism import parse_statements
from sphnn.verifier import check, feedback_line, parse_reply

premises, _ = parse_statements("no m0 s\nall p m0\nsome-not s p")
replies = [
    "yes (circle s, disconnects from, circle m0), (circle p, inside, circle m0), "
    "(circle s, partially overlaps with, circle p)",
    "cannot",
    "(circle m0, inside, circle p)\n(circle s, disconnects from, circle p)\n"
    "(circle s, disconnects from, circle m0)",
]

for k, text in enumerate(replies, 1):
    decision = parse_reply(text)
    report = check(decision, premises)
    print(f"round {k}: class {report.hallucination_class.value}, "
          f"lenient {report.hallucination_class_lenient.value}, "
          f"constructible {report.claims_constructible}")
    for statement, status in report.coverage:
        print(f"    {statement:20s} {status}")
    if not report.correct:
        print("    feedback: " + feedback_line(report, decision))
