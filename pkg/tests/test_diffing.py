from hypothesis import given

from demosynth.diffing import diff_trees
from demosynth.sketch import Element, Text, parse_sketch
from demosynth.timeline import InsertNode, ReplaceString, apply_edit, snapshots
from strategies import tree_pairs


def apply_script(tree, script):
    for edit in script:
        tree = apply_edit(tree, edit)
    return tree


class TestExamples:
    def test_counter_snapshot_pair_is_one_replace(self, counter_sketch, counter_timelines):
        snaps = snapshots(counter_sketch, counter_timelines[0])
        script = diff_trees(snaps[0], snaps[1])
        assert script == [ReplaceString((0, 0), None, "1")]
        assert apply_script(snaps[0], script) == snaps[1]

    def test_identical_trees_empty_script(self, todo_sketch):
        assert diff_trees(todo_sketch, todo_sketch) == []

    def test_appended_item_is_single_insert(self):
        two = parse_sketch("<ul><li>a</li><li>b</li></ul>")
        three = parse_sketch("<ul><li>a</li><li>b</li><li>c</li></ul>")
        script = diff_trees(two, three)
        assert script == [InsertNode((), 2, Element("li", (), (Text("c"),)))]
        assert apply_script(two, script) == three

    def test_attr_creation(self):
        a = parse_sketch("<div><p>x</p></div>")
        b = parse_sketch('<div id="d"><p>x</p></div>')
        script = diff_trees(a, b)
        assert script == [ReplaceString((), "id", "d")]
        assert apply_script(a, script) == b

    def test_replaced_subtree_is_delete_plus_insert(self):
        a = parse_sketch("<div><p>x</p></div>")
        b = parse_sketch("<div><b>x</b></div>")
        script = diff_trees(a, b)
        assert apply_script(a, script) == b


class TestProperties:
    @given(tree_pairs())
    def test_diff_apply_inverse(self, pair):
        before, after = pair
        script = diff_trees(before, after)
        assert apply_script(before, script) == after

    @given(tree_pairs())
    def test_deterministic(self, pair):
        before, after = pair
        assert diff_trees(before, after) == diff_trees(before, after)
