"""End-to-end offline demo: build a tiny corpus, extract representations,
answer a task query, and run the evaluation grid.

Everything runs with the fixture extractor and the deterministic embedder,
so no network or API key is needed:

    python scripts/run_demo.py --workdir /tmp/slsrec-demo
"""

import argparse
import json
import subprocess
import sys
from pathlib import Path

FUNCTIONS = [
    {
        "id": "fn-s3-tagger",
        "name": "s3-rekognition-tagger",
        "code": (
            "public async Task FunctionHandler(S3Event input, ILambdaContext ctx)\n"
            "{\n"
            "    foreach (var record in input.Records)\n"
            "    {\n"
            "        var key = record.S3.Object.Key;\n"
            "        if (!key.EndsWith(\".png\") && !key.EndsWith(\".jpg\")) continue;\n"
            "        var labels = await _rekognition.DetectLabelsAsync(Request(record));\n"
            "        await _s3.PutObjectTaggingAsync(TagRequest(record, labels));\n"
            "    }\n"
            "}\n"
        ),
        "ext": "cs",
        "readme": "Tags uploaded S3 images with labels detected by Rekognition.",
        "intent": (
            "Responds to S3 object creation events, detects labels in uploaded "
            "images with Amazon Rekognition, and writes the labels back as "
            "object tags."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": ["C#"],
    },
    {
        "id": "fn-thumbnailer",
        "name": "image-thumbnailer",
        "code": (
            "def lambda_handler(event, context):\n"
            "    for record in event['Records']:\n"
            "        body = s3.get_object(**locate(record))['Body'].read()\n"
            "        image = Image.open(io.BytesIO(body))\n"
            "        image.thumbnail((128, 128))\n"
            "        s3.put_object(Bucket=OUT_BUCKET, Key=key(record), Body=dump(image))\n"
            "    return {'status': 'ok'}\n"
        ),
        "ext": "py",
        "readme": "Creates preview thumbnails for images added to a bucket.",
        "intent": (
            "Generates small thumbnail previews whenever an image lands in an "
            "S3 bucket and stores them in a separate output bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": ["Python"],
    },
    {
        "id": "fn-crud-api",
        "name": "customer-crud-api",
        "code": (
            "exports.handler = async (event) => {\n"
            "    if (event.method === 'POST') {\n"
            "        await db.put({TableName: TABLE, Item: JSON.parse(event.body)}).promise();\n"
            "        return {statusCode: 201};\n"
            "    }\n"
            "    const rows = await db.scan({TableName: TABLE}).promise();\n"
            "    return {statusCode: 200, body: JSON.stringify(rows.Items)};\n"
            "};\n"
        ),
        "ext": "js",
        "readme": "HTTP CRUD API over a DynamoDB table.",
        "intent": (
            "Implements an HTTP CRUD API that stores and lists customer "
            "records in a DynamoDB table."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS DynamoDB"],
        "languages": ["JavaScript"],
    },
    {
        "id": "fn-firestore-counter",
        "name": "firestore-counter",
        "code": (
            "exports.handler = functions.firestore.document('posts/{id}').onWrite(\n"
            "    async (change, context) => {\n"
            "        const delta = change.after.exists ? 1 : -1;\n"
            "        await counters.doc('posts').update({count: increment(delta)});\n"
            "    });\n"
        ),
        "ext": "js",
        "readme": "Keeps an aggregate counter in sync with collection writes.",
        "intent": (
            "Maintains an aggregate counter document in Firestore whenever "
            "documents are created or deleted in a collection."
        ),
        "platforms": ["Google Cloud Functions"],
        "services": ["Google Firestore"],
        "languages": ["JavaScript"],
    },
    {
        "id": "fn-blob-ocr",
        "name": "blob-ocr",
        "code": (
            "public static async Task Run([BlobTrigger(\"docs/{name}\")] Stream doc,\n"
            "                             string name, ILogger log)\n"
            "{\n"
            "    var text = await _vision.RecognizeAsync(doc);\n"
            "    await _container.UploadTextAsync($\"{name}.txt\", text);\n"
            "}\n"
        ),
        "ext": "cs",
        "readme": "Runs OCR over uploaded documents.",
        "intent": (
            "Performs optical character recognition on documents uploaded to "
            "blob storage and stores the recognized text."
        ),
        "platforms": ["Azure Functions"],
        "services": ["Azure Blob Storage"],
        "languages": ["C#"],
    },
    {
        "id": "fn-hello",
        "name": "hello-world-sample",
        "code": "def handler(event, context):\n    return \"Hello World\"\n",
        "ext": "py",
        "readme": None,
        "intent": "Returns a greeting.",
        "platforms": ["AWS Lambda"],
        "services": [],
        "languages": ["Python"],
    },
]

QUERIES = [
    {
        "id": "q-tagger",
        "text": (
            "The function handler responds to S3 events and if the object is "
            "a png or jpg file uses Amazon Rekognition to detect labels, then "
            "adds them as tags to the S3 object."
        ),
        "ground_truth_id": "fn-s3-tagger",
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": [],
    },
    {
        "id": "q-thumbs",
        "text": "Make small preview thumbnails when images are added to a bucket.",
        "ground_truth_id": "fn-thumbnailer",
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": [],
    },
    {
        "id": "q-crud",
        "text": "Store and list customer records in DynamoDB behind an HTTP API.",
        "ground_truth_id": "fn-crud-api",
        "platforms": ["AWS Lambda"],
        "services": ["AWS DynamoDB"],
        "languages": ["JavaScript"],
    },
]


def write_inputs(workdir: Path):
    manifest_rows = []
    fixture_rows = []
    for fn in FUNCTIONS:
        rel = f"functions/{fn['id']}/handler.{fn['ext']}"
        source = workdir / rel
        source.parent.mkdir(parents=True, exist_ok=True)
        source.write_text(fn["code"])
        row = {
            "id": fn["id"], "name": fn["name"], "origin": "demo",
            "paths": [rel],
        }
        if fn["readme"]:
            readme_rel = f"functions/{fn['id']}/README.md"
            (workdir / readme_rel).write_text(fn["readme"])
            row["readme_path"] = readme_rel
        manifest_rows.append(row)
        fixture_rows.append({
            "id": fn["id"], "intent_text": fn["intent"],
            "platforms": fn["platforms"], "services": fn["services"],
            "languages": fn["languages"],
        })
    for q in QUERIES:
        fixture_rows.append({
            "id": q["id"], "intent_text": q["text"],
            "platforms": q["platforms"], "services": q["services"],
            "languages": q["languages"],
        })

    (workdir / "manifest.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in manifest_rows)
    )
    (workdir / "fixtures.jsonl").write_text(
        "".join(json.dumps(r) + "\n" for r in fixture_rows)
    )
    (workdir / "queries.jsonl").write_text(
        "".join(
            json.dumps({k: q[k] for k in ("id", "text", "ground_truth_id")}) + "\n"
            for q in QUERIES
        )
    )


def cli(*args):
    command = [sys.executable, "-m", "slsrec.cli", *map(str, args)]
    print(f"\n$ slsrec {' '.join(map(str, args))}", flush=True)
    subprocess.run(command, check=True)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=Path("demo-workdir"))
    args = parser.parse_args()
    workdir = args.workdir
    workdir.mkdir(parents=True, exist_ok=True)
    write_inputs(workdir)

    offline = [
        "--extractor", "fixture", "--fixture-file", workdir / "fixtures.jsonl",
        "--embedder", "deterministic",
    ]
    cli("ingest", "--manifest", workdir / "manifest.jsonl",
        "--out", workdir / "repo.json")
    cli("extract", "--repo", workdir / "repo.json",
        "--reprs", workdir / "reprs.jsonl", *offline)
    cli("query", QUERIES[0]["text"], "--reprs", workdir / "reprs.jsonl",
        "--query-id", "q-tagger", "--k", 5, *offline)
    cli("evaluate", "--dataset", workdir / "queries.jsonl",
        "--repo", workdir / "repo.json", "--reprs", workdir / "reprs.jsonl",
        "--method", "all", "--repetitions", 3,
        "--report", workdir / "report.json", *offline)
    print(f"\nartifacts in {workdir}/ (report.json has the full metrics)")


if __name__ == "__main__":
    main()
