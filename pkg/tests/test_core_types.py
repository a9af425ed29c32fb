import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chatplan.core import (
    LocationType,
    RoomSpec,
    RoomType,
    RoomsDocument,
    SizeType,
    ValidationError,
    build_room_graph,
)


def make_doc(*rooms):
    return RoomsDocument(rooms=tuple(rooms))


class TestEnums:
    def test_room_type_closed_set(self):
        assert [t.value for t in RoomType] == [
            "LivingRoom", "MasterRoom", "Kitchen", "Bathroom", "DiningRoom",
            "CommonRoom", "SecondRoom", "ChildRoom", "StudyRoom", "GuestRoom",
            "Balcony", "Entrance", "Storage",
        ]

    def test_location_type_closed_set(self):
        assert [t.value for t in LocationType] == [
            "north", "northwest", "west", "southwest", "south",
            "southeast", "east", "northeast", "center",
        ]

    def test_size_type_closed_set(self):
        assert [t.value for t in SizeType] == ["XL", "L", "M", "S", "XS"]


class TestRoomsDocument:
    def test_empty_name_rejected(self):
        with pytest.raises(ValidationError):
            RoomSpec(name="")

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            make_doc(RoomSpec(name="a"), RoomSpec(name="a"))

    def test_unknown_link_target_named_in_error(self):
        with pytest.raises(ValidationError, match="garage"):
            make_doc(RoomSpec(name="a", link=("garage",)))

    def test_self_link_rejected(self):
        with pytest.raises(ValidationError, match="itself"):
            make_doc(RoomSpec(name="a", link=("a",)))

    def test_links_symmetrized(self):
        doc = make_doc(RoomSpec(name="a", link=("b",)), RoomSpec(name="b"))
        assert doc.rooms[1].link == ("a",)

    def test_empty_document_rejected(self):
        with pytest.raises(ValidationError):
            RoomsDocument(rooms=())

    def test_json_round_trip(self):
        doc = make_doc(
            RoomSpec(name="living", link=("kitchen",), type=RoomType.LivingRoom,
                     location=LocationType.south, size=SizeType.XL),
            RoomSpec(name="kitchen", type=RoomType.Kitchen),
        )
        again = RoomsDocument.from_json(doc.to_json())
        assert again == doc

    def test_json_field_names_match_wire_format(self):
        doc = make_doc(RoomSpec(name="k", type=RoomType.Kitchen, size=SizeType.S))
        data = doc.to_json_dict()
        assert set(data) == {"rooms"}
        assert set(data["rooms"][0]) == {"name", "type", "link", "size"}

    def test_empty_link_serializes_as_empty_array(self):
        doc = make_doc(RoomSpec(name="k"))
        assert json.loads(doc.to_json())["rooms"][0]["link"] == []

    def test_strict_parse_rejects_illegal_enum(self):
        with pytest.raises(ValidationError, match="illegal type"):
            RoomsDocument.from_json(
                '{"rooms": [{"name": "k", "link": [], "type": "bathrm"}]}'
            )

    def test_missing_link_rejected(self):
        with pytest.raises(ValidationError, match="link"):
            RoomsDocument.from_json('{"rooms": [{"name": "k"}]}')


class TestRoomGraph:
    def test_singleton_graph(self):
        g = build_room_graph(make_doc(RoomSpec(name="solo")))
        assert g.n == 1
        assert g.degree.tolist() == [0]
        assert g.spd.tolist() == [[0]]

    def test_three_room_chain(self):
        # Hand-run BFS on Living-Kitchen-Balcony: spd(Living, Balcony) = 2.
        doc = make_doc(
            RoomSpec(name="Living", link=("Kitchen",)),
            RoomSpec(name="Kitchen", link=("Balcony",)),
            RoomSpec(name="Balcony"),
        )
        g = build_room_graph(doc)
        assert g.degree.tolist() == [1, 2, 1]
        assert g.spd[0, 2] == 2
        assert g.spd.tolist() == [[0, 1, 2], [1, 0, 1], [2, 1, 0]]

    def test_disconnected_pair_uses_sentinel(self):
        g = build_room_graph(make_doc(RoomSpec(name="a"), RoomSpec(name="b")))
        assert g.spd[0, 1] == 2 == g.n

    def test_adjacency_iff_spd_one(self):
        doc = make_doc(
            RoomSpec(name="a", link=("b", "c")),
            RoomSpec(name="b"),
            RoomSpec(name="c"),
            RoomSpec(name="d"),
        )
        g = build_room_graph(doc)
        assert np.array_equal(g.spd == 1, g.adjacency == 1)

    @given(st.integers(2, 8), st.data())
    @settings(max_examples=60, deadline=None)
    def test_spd_symmetry_and_triangle_inequality(self, n, data):
        names = [f"r{i}" for i in range(n)]
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        chosen = data.draw(st.lists(st.sampled_from(pairs), unique=True))
        links = {i: [] for i in range(n)}
        for i, j in chosen:
            links[i].append(names[j])
        doc = make_doc(*[RoomSpec(name=names[i], link=tuple(links[i])) for i in range(n)])
        g = build_room_graph(doc)
        assert np.array_equal(g.spd, g.spd.T)
        assert np.array_equal(g.degree, g.adjacency.sum(axis=1))
        finite = g.spd < n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if finite[i, k] and finite[k, j]:
                        assert g.spd[i, j] <= g.spd[i, k] + g.spd[k, j]
