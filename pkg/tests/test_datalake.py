from __future__ import annotations

import json

import pytest

from maris.datalake import (DataLake, IngestError, NotFoundError, QASet,
                            SchemaError, StructuredRecord)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n"
                            for r in records), encoding="utf-8")
    return path


def doc_record(doc_id, body="Some body text.", **overrides):
    record = {
        "id": doc_id, "title": f"Title {doc_id}", "body": body,
        "language": "en", "kind": "article",
        "source": {"origin_name": "unit fixture",
                   "origin_url_or_citation": "file://fixture",
                   "retrieved_at": "2026-08-01T00:00:00+00:00"},
    }
    record.update(overrides)
    return record


class TestIngestDocuments:
    def test_three_valid_records(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        path = write_jsonl(tmp_path / "in.jsonl",
                           [doc_record(f"d{i}") for i in range(3)])
        assert lake.ingest_documents(path, kind="article") == 3

    def test_empty_file(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        (tmp_path / "empty.jsonl").write_text("", encoding="utf-8")
        assert lake.ingest_documents(tmp_path / "empty.jsonl",
                                     kind="article") == 0

    def test_duplicate_id_cites_line(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        path = write_jsonl(tmp_path / "dup.jsonl",
                           [doc_record("d1"), doc_record("d1")])
        with pytest.raises(IngestError, match="line 2"):
            lake.ingest_documents(path, kind="article")
        assert lake.document_count() == 0  # batch fully rejected

    def test_malformed_line_names_line_number(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps(doc_record("d1")) + "\n{not json\n",
                        encoding="utf-8")
        with pytest.raises(IngestError, match="line 2"):
            lake.ingest_documents(path, kind="article")

    def test_idempotent_reingest(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        path = write_jsonl(tmp_path / "in.jsonl",
                           [doc_record("d1"), doc_record("d2")])
        assert lake.ingest_documents(path, kind="article") == 2
        before = {d.id: d for d in lake.list_documents()}
        assert lake.ingest_documents(path, kind="article") == 2
        assert {d.id: d for d in lake.list_documents()} == before

    def test_same_id_different_content_rejected(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "a.jsonl", [doc_record("d1", body="one")])
        lake.ingest_documents(tmp_path / "a.jsonl", kind="article")
        write_jsonl(tmp_path / "b.jsonl", [doc_record("d1", body="two")])
        with pytest.raises(IngestError, match="different content"):
            lake.ingest_documents(tmp_path / "b.jsonl", kind="article")

    def test_missing_source_rejected(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        record = doc_record("d1")
        record["source"] = {"origin_name": ""}
        write_jsonl(tmp_path / "x.jsonl", [record])
        with pytest.raises(IngestError, match="origin_name"):
            lake.ingest_documents(tmp_path / "x.jsonl", kind="article")

    def test_unsupported_language_rejected(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "x.jsonl", [doc_record("d1", language="xx")])
        with pytest.raises(IngestError, match="language"):
            lake.ingest_documents(tmp_path / "x.jsonl", kind="article")


class TestGetAndList:
    def test_round_trip_body_bit_identical(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        body = "Linhas com acentuação: maré, pré-sal.\tTabs preserved. ∎"
        write_jsonl(tmp_path / "in.jsonl", [doc_record("d1", body=body)])
        lake.ingest_documents(tmp_path / "in.jsonl", kind="article")
        assert lake.get_document("d1").body == body

    def test_round_trip_survives_reopen(self, tmp_path):
        body = "Texto original. Segunda frase."
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "in.jsonl", [doc_record("d1", body=body)])
        lake.ingest_documents(tmp_path / "in.jsonl", kind="article")
        reopened = DataLake(tmp_path / "lake")
        assert reopened.get_document("d1").body == body

    def test_list_filters_by_kind(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "in.jsonl", [
            doc_record("w1", kind="wiki"), doc_record("w2", kind="wiki"),
            doc_record("r1", kind="report")])
        lake.ingest_documents(tmp_path / "in.jsonl", kind="wiki")
        assert len(lake.list_documents(kind="wiki")) == 2
        assert [d.id for d in lake.list_documents()] == ["r1", "w1", "w2"]

    def test_get_missing(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        with pytest.raises(NotFoundError):
            lake.get_document("missing")

    def test_manifest_offsets_address_records(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "in.jsonl",
                    [doc_record(f"d{i}", body=f"Body número {i}.")
                     for i in range(5)])
        lake.ingest_documents(tmp_path / "in.jsonl", kind="article")
        manifest = json.loads(
            (lake.root / "manifest.json").read_text(encoding="utf-8"))
        for doc_id, entry in manifest["documents"].items():
            data = (lake.root / "documents" /
                    f"{entry['kind']}.jsonl").read_bytes()
            line = data[entry["offset"]:].split(b"\n", 1)[0]
            assert json.loads(line)["id"] == doc_id


class TestStructured:
    def tide(self, station, ts, height):
        return {"station_or_region": station, "observed_at": ts,
                "payload": {"height_m": height}}

    def test_five_tide_records(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        records = [self.tide("Santos", f"2026-08-10T0{i}:00:00+00:00",
                             1.0 + i / 10) for i in range(5)]
        write_jsonl(tmp_path / "tide.jsonl", records)
        assert lake.ingest_structured(tmp_path / "tide.jsonl", "tide") == 5

    def test_missing_required_field_names_it(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "tide.jsonl",
                    [{"station_or_region": "Santos",
                      "observed_at": "2026-08-10T00:00:00+00:00",
                      "payload": {}}])
        with pytest.raises(SchemaError, match="height_m"):
            lake.ingest_structured(tmp_path / "tide.jsonl", "tide")

    def test_undeclared_field_names_it(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "tide.jsonl",
                    [{"station_or_region": "Santos",
                      "observed_at": "2026-08-10T00:00:00+00:00",
                      "payload": {"height_m": 1.0, "bogus": 2}}])
        with pytest.raises(SchemaError, match="bogus"):
            lake.ingest_structured(tmp_path / "tide.jsonl", "tide")

    def test_time_range_query(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        records = [self.tide("Santos", f"2026-08-10T{h:02d}:00:00+00:00",
                             1.0) for h in (1, 5, 9, 13, 17)]
        write_jsonl(tmp_path / "tide.jsonl", records)
        lake.ingest_structured(tmp_path / "tide.jsonl", "tide")
        hits = lake.query_structured("tide", "2026-08-10T04:00:00+00:00",
                                     "2026-08-10T10:00:00+00:00")
        assert [r.observed_at for r in hits] == [
            "2026-08-10T05:00:00+00:00", "2026-08-10T09:00:00+00:00"]

    def test_stored_sorted_by_observed_at(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        records = [self.tide("S", "2026-08-10T09:00:00+00:00", 2.0),
                   self.tide("S", "2026-08-10T03:00:00+00:00", 1.0)]
        write_jsonl(tmp_path / "tide.jsonl", records)
        lake.ingest_structured(tmp_path / "tide.jsonl", "tide")
        stored = lake.query_structured("tide")
        assert [r.observed_at for r in stored] == [
            "2026-08-10T03:00:00+00:00", "2026-08-10T09:00:00+00:00"]


class TestWikiAndQASets:
    def test_wiki_round_trip_and_axis_filter(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        entries = [
            {"slug": "coral", "title": "Coral", "axis": "biodiversity",
             "body": "# Coral\nReefs."},
            {"slug": "whales", "title": "Whales", "axis": "biodiversity",
             "body": "# Whales\nMigration."},
            {"slug": "sea-law", "title": "Law of the Sea",
             "axis": "legislation-and-governance", "body": "# Law"},
        ]
        write_jsonl(tmp_path / "wiki.jsonl", entries)
        assert lake.ingest_wiki(tmp_path / "wiki.jsonl") == 3
        assert lake.get_wiki("coral").body == "# Coral\nReefs."
        assert len(lake.list_wiki(axis="biodiversity")) == 2
        with pytest.raises(NotFoundError):
            lake.get_wiki("nope")

    def test_wiki_bad_axis_rejected(self, tmp_path):
        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "wiki.jsonl",
                    [{"slug": "x", "title": "X", "axis": "cooking",
                      "body": "b"}])
        with pytest.raises(IngestError, match="axis"):
            lake.ingest_wiki(tmp_path / "wiki.jsonl")

    def test_qaset_mc_invariants(self):
        with pytest.raises(IngestError, match="exactly 5"):
            QASet.from_dict({"id": "q1", "answer_en": "a",
                             "mc_alternatives": ["a", "b", "c"],
                             "mc_correct_index": 0})
        with pytest.raises(IngestError, match="mc_correct_index"):
            QASet.from_dict({"id": "q1", "answer_en": "a",
                             "mc_alternatives": ["a", "b", "c", "d", "e"]})
        with pytest.raises(IngestError, match="does not match"):
            QASet.from_dict({"id": "q1", "answer_en": "a",
                             "mc_alternatives": ["z", "b", "c", "d", "e"],
                             "mc_correct_index": 0})
        qa = QASet.from_dict({"id": "q1", "answer_en": "a",
                              "mc_alternatives": ["a", "b", "c", "d", "e"],
                              "mc_correct_index": 0})
        assert qa.mc_alternatives is not None

    def test_qaset_likert_range(self):
        with pytest.raises(IngestError, match="likert"):
            QASet.from_dict({"id": "q1", "meaningfulness_likert": 6})


class TestConcurrency:
    def test_readers_see_pre_or_post_batch(self, tmp_path):
        import threading

        lake = DataLake(tmp_path / "lake")
        write_jsonl(tmp_path / "base.jsonl", [doc_record("d0")])
        lake.ingest_documents(tmp_path / "base.jsonl", kind="article")
        write_jsonl(tmp_path / "batch.jsonl",
                    [doc_record(f"b{i}") for i in range(50)])

        observed = []
        stop = threading.Event()

        def reader():
            while not stop.is_set():
                observed.append(len(lake.list_documents()))

        threads = [threading.Thread(target=reader) for _ in range(4)]
        for t in threads:
            t.start()
        lake.ingest_documents(tmp_path / "batch.jsonl", kind="article")
        stop.set()
        for t in threads:
            t.join()
        assert set(observed) <= {1, 51}  # never a partial batch
