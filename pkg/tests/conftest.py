"""Shared fixtures: the S3/Rekognition worked-example store and a small
on-disk demo corpus used by ingestion and CLI tests."""

import json

import pytest

from slsrec.embedding import DeterministicEmbedder, embed_intent
from slsrec.extraction import (
    Provenance,
    SemanticRepresentation,
    save_representations,
)

# ---------------------------------------------------------------------------
# Worked example: an image-tagging function and the matching task query
# ---------------------------------------------------------------------------

TARGET_ID = "fn-s3-rekognition-tagger"
QUERY_ID = "q-s3-tagger"

QUERY_TEXT = (
    "The generated function handler responds to S3 events on an Amazon S3 "
    "bucket and if the object is a png or jpg file uses Amazon Rekognition "
    "to detect labels. Once the labels are found it adds them as tags to "
    "the S3 Object."
)

TARGET_INTENT = (
    "The code defines a serverless function that responds to S3 create "
    "events. When an image file is uploaded to an S3 bucket, the function "
    "uses Amazon Rekognition to detect labels in the image. It then tags "
    "the S3 object with the detected labels and their confidence scores. "
    "The function includes an integration test to ensure that the image is "
    "processed correctly and tagged with labels."
)

QUERY_ATTRIBUTES = {
    "platforms": ["AWS Lambda"],
    "services": ["AWS S3", "AWS Rekognition"],
    "languages": [],
}

GOLDEN_FUNCTIONS = [
    {
        "id": TARGET_ID,
        "intent_text": TARGET_INTENT,
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": ["C#"],
    },
    {
        "id": "fn-image-moderation",
        "intent_text": (
            "Moderates user uploaded photos by detecting unsafe content with "
            "an image analysis service and quarantining flagged files in a "
            "separate bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": ["Python"],
    },
    {
        "id": "fn-thumbnail",
        "intent_text": (
            "Generates resized thumbnail images whenever a new picture lands "
            "in a storage bucket and writes the thumbnails back to a second "
            "bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": ["Python"],
    },
    {
        "id": "fn-video-transcode",
        "intent_text": (
            "Transcodes uploaded videos into streaming friendly formats and "
            "stores the renditions in an output bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": ["Go"],
    },
    {
        "id": "fn-dynamo-crud",
        "intent_text": (
            "Implements a REST style CRUD API over a DynamoDB table for "
            "managing customer records through HTTP requests."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS DynamoDB"],
        "languages": ["JavaScript"],
    },
    {
        "id": "fn-sqs-fanout",
        "intent_text": (
            "Fans out order events from a queue to several notification "
            "topics with retry handling."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS SQS", "AWS SNS"],
        "languages": ["JavaScript"],
    },
    {
        "id": "fn-sentiment",
        "intent_text": (
            "Analyzes the sentiment of customer feedback messages and "
            "records the resulting scores for reporting."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS Comprehend"],
        "languages": ["Python"],
    },
    {
        "id": "fn-firestore-sync",
        "intent_text": (
            "Keeps an aggregate counter document in Firestore up to date "
            "whenever documents are created or deleted in a collection."
        ),
        "platforms": ["Google Cloud Functions"],
        "services": ["Google Firestore"],
        "languages": ["JavaScript"],
    },
    {
        "id": "fn-pubsub-alerts",
        "intent_text": (
            "Consumes monitoring events from a message topic and forwards "
            "alert notifications to an on-call webhook."
        ),
        "platforms": ["Google Cloud Functions"],
        "services": ["Google Pub/Sub"],
        "languages": ["Python"],
    },
    {
        "id": "fn-blob-ocr",
        "intent_text": (
            "Runs optical character recognition over documents uploaded to "
            "blob storage and stores the recognized text."
        ),
        "platforms": ["Azure Functions"],
        "services": ["Azure Blob Storage"],
        "languages": ["C#"],
    },
    {
        "id": "fn-cosmos-ingest",
        "intent_text": (
            "Ingests telemetry batches over HTTP and upserts them into a "
            "Cosmos DB container."
        ),
        "platforms": ["Azure Functions"],
        "services": ["Azure Cosmos DB"],
        "languages": ["TypeScript"],
    },
    {
        "id": "fn-wordcount",
        "intent_text": (
            "Counts word frequencies in submitted text documents and returns "
            "the most common terms."
        ),
        "platforms": ["Apache OpenWhisk"],
        "services": [],
        "languages": ["Python"],
    },
]


def build_representation(row: dict, embedder) -> SemanticRepresentation:
    return SemanticRepresentation(
        subject_id=row["id"],
        intent_text=row["intent_text"],
        intent_vector=embed_intent(row["intent_text"], embedder),
        platforms=frozenset(row["platforms"]),
        services=frozenset(row["services"]),
        languages=frozenset(row["languages"]),
        provenance=Provenance("fixture", "fixture", 0.0),
    )


@pytest.fixture(scope="session")
def shared_embedder():
    return DeterministicEmbedder()


@pytest.fixture(scope="session")
def golden_reps(shared_embedder):
    return {
        row["id"]: build_representation(row, shared_embedder)
        for row in GOLDEN_FUNCTIONS
    }


@pytest.fixture(scope="session")
def golden_query_rep(shared_embedder):
    return SemanticRepresentation(
        subject_id=QUERY_ID,
        intent_text=QUERY_TEXT,
        intent_vector=embed_intent(QUERY_TEXT, shared_embedder),
        platforms=frozenset(QUERY_ATTRIBUTES["platforms"]),
        services=frozenset(QUERY_ATTRIBUTES["services"]),
        languages=frozenset(QUERY_ATTRIBUTES["languages"]),
        provenance=Provenance("fixture", "fixture", 0.0),
    )


@pytest.fixture
def golden_store_file(tmp_path, golden_reps):
    path = tmp_path / "representations.jsonl"
    save_representations(path, golden_reps.values())
    return path


@pytest.fixture
def golden_query_fixture_file(tmp_path):
    """Extraction fixture answering the worked-example query offline."""
    path = tmp_path / "query_fixtures.jsonl"
    row = {"id": QUERY_ID, "intent_text": QUERY_TEXT, **QUERY_ATTRIBUTES}
    path.write_text(json.dumps(row) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# On-disk demo corpus
# ---------------------------------------------------------------------------

S3_TAGGER_CS = """\
using Amazon.Lambda.Core;
using Amazon.Rekognition;
using Amazon.Rekognition.Model;
using Amazon.S3;
using Amazon.S3.Model;

namespace ImageTagging
{
    public class Function
    {
        private readonly IAmazonS3 _s3 = new AmazonS3Client();
        private readonly IAmazonRekognition _rekognition = new AmazonRekognitionClient();

        public async Task FunctionHandler(S3Event input, ILambdaContext context)
        {
            foreach (var record in input.Records)
            {
                var bucket = record.S3.Bucket.Name;
                var key = record.S3.Object.Key;
                if (!key.EndsWith(".png") && !key.EndsWith(".jpg"))
                {
                    continue;
                }
                var detected = await _rekognition.DetectLabelsAsync(new DetectLabelsRequest
                {
                    Image = new Image { S3Object = new S3Object { Bucket = bucket, Name = key } },
                    MaxLabels = 10,
                });
                var tags = detected.Labels.Select(l => new Tag { Key = l.Name, Value = l.Confidence.ToString() });
                await _s3.PutObjectTaggingAsync(new PutObjectTaggingRequest
                {
                    BucketName = bucket,
                    Key = key,
                    Tagging = new Tagging { TagSet = tags.ToList() },
                });
            }
        }
    }
}
"""

THUMBNAIL_PY = """\
import io

import boto3
from PIL import Image

s3 = boto3.client("s3")


def lambda_handler(event, context):
    for record in event["Records"]:
        bucket = record["s3"]["bucket"]["name"]
        key = record["s3"]["object"]["key"]
        body = s3.get_object(Bucket=bucket, Key=key)["Body"].read()
        image = Image.open(io.BytesIO(body))
        image.thumbnail((128, 128))
        buffer = io.BytesIO()
        image.save(buffer, format="PNG")
        buffer.seek(0)
        s3.put_object(Bucket=bucket + "-thumbnails", Key=key, Body=buffer)
    return {"status": "ok"}
"""

DYNAMO_JS = """\
const AWS = require("aws-sdk");
const db = new AWS.DynamoDB.DocumentClient();

exports.handler = async (event) => {
    const method = event.requestContext.http.method;
    if (method === "POST") {
        const item = JSON.parse(event.body);
        await db.put({ TableName: process.env.TABLE, Item: item }).promise();
        return { statusCode: 201 };
    }
    const res = await db.scan({ TableName: process.env.TABLE }).promise();
    return { statusCode: 200, body: JSON.stringify(res.Items) };
};
"""

HELLO_PY = """\
def handler(event, context):
    return "Hello World"
"""

BENCHMARK_PY = """\
import statistics
import time


def invoke_target():
    time.sleep(0.01)


def run_rounds(n):
    samples = []
    for _ in range(n):
        start = time.perf_counter()
        invoke_target()
        samples.append(time.perf_counter() - start)
    return statistics.mean(samples)


if run_rounds(5) > 1.0:
    raise SystemExit(1)
"""

DEMO_UNITS = [
    {
        "id": "demo-s3-tagger",
        "name": "s3-rekognition-tagger",
        "origin": "demo-suite",
        "file": ("fns/s3_tagger/Function.cs", S3_TAGGER_CS),
        "readme": (
            "Tags uploaded S3 images with labels detected by Amazon "
            "Rekognition whenever an object creation event fires."
        ),
        "language_hint": "csharp",
    },
    {
        "id": "demo-thumbnail",
        "name": "image-thumbnailer",
        "origin": "demo-suite",
        "file": ("fns/thumbnail/handler.py", THUMBNAIL_PY),
        "readme": (
            "Creates small preview thumbnails for images added to an S3 "
            "bucket and stores them in a thumbnails bucket."
        ),
        "language_hint": "python",
    },
    {
        "id": "demo-dynamo",
        "name": "customer-crud-api",
        "origin": "demo-suite",
        "file": ("fns/dynamo/index.js", DYNAMO_JS),
        "readme": (
            "Stores and lists customer records in a DynamoDB table behind "
            "an HTTP endpoint."
        ),
        "language_hint": "javascript",
    },
    {
        "id": "demo-hello",
        "name": "hello-sample",
        "origin": "demo-suite",
        "file": ("fns/hello/handler.py", HELLO_PY),
        "readme": None,
        "language_hint": "python",
    },
    {
        "id": "demo-bench",
        "name": "benchmark_driver",
        "origin": "demo-suite",
        "file": ("fns/bench/benchmark_driver.py", BENCHMARK_PY),
        "readme": None,
        "language_hint": "python",
    },
]

DEMO_FIXTURES = [
    {
        "id": "demo-s3-tagger",
        "intent_text": TARGET_INTENT,
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": ["C#"],
    },
    {
        "id": "demo-thumbnail",
        "intent_text": (
            "Creates thumbnail images for pictures uploaded to a storage "
            "bucket and saves them to a separate thumbnails bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": ["Python"],
    },
    {
        "id": "demo-dynamo",
        "intent_text": (
            "Provides a small HTTP CRUD API storing and listing customer "
            "records in a DynamoDB table."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS DynamoDB"],
        "languages": ["JavaScript"],
    },
    {
        "id": "dq-tagger",
        "intent_text": QUERY_TEXT,
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3", "AWS Rekognition"],
        "languages": [],
    },
    {
        "id": "dq-thumbnail",
        "intent_text": (
            "I need a function that makes small preview thumbnails when "
            "images are added to an S3 bucket."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS S3"],
        "languages": [],
    },
    {
        "id": "dq-dynamo",
        "intent_text": (
            "Store and list customer records in DynamoDB through an HTTP "
            "API."
        ),
        "platforms": ["AWS Lambda"],
        "services": ["AWS DynamoDB"],
        "languages": [],
    },
]

DEMO_QUERIES = [
    {"id": "dq-tagger", "text": QUERY_TEXT, "ground_truth_id": "demo-s3-tagger"},
    {
        "id": "dq-thumbnail",
        "text": DEMO_FIXTURES[4]["intent_text"],
        "ground_truth_id": "demo-thumbnail",
    },
    {
        "id": "dq-dynamo",
        "text": DEMO_FIXTURES[5]["intent_text"],
        "ground_truth_id": "demo-dynamo",
    },
]


def write_demo_corpus(root) -> str:
    """Write manifest + sources under `root`; returns the manifest path."""
    records = []
    for unit in DEMO_UNITS:
        rel_path, content = unit["file"]
        source = root / rel_path
        source.parent.mkdir(parents=True, exist_ok=True)
        source.write_text(content, encoding="utf-8")
        record = {
            "id": unit["id"],
            "name": unit["name"],
            "origin": unit["origin"],
            "paths": [rel_path],
            "language_hint": unit["language_hint"],
        }
        if unit["readme"]:
            readme_path = f"fns/{unit['id']}/README.md"
            readme = root / readme_path
            readme.parent.mkdir(parents=True, exist_ok=True)
            readme.write_text(unit["readme"], encoding="utf-8")
            record["readme_path"] = readme_path
        records.append(record)
    manifest = root / "manifest.jsonl"
    manifest.write_text(
        "".join(json.dumps(r) + "\n" for r in records), encoding="utf-8"
    )
    return str(manifest)


@pytest.fixture
def demo_manifest(tmp_path):
    return write_demo_corpus(tmp_path)


@pytest.fixture
def demo_fixture_file(tmp_path):
    path = tmp_path / "extraction_fixtures.jsonl"
    path.write_text(
        "".join(json.dumps(row) + "\n" for row in DEMO_FIXTURES), encoding="utf-8"
    )
    return path


@pytest.fixture
def demo_query_dataset(tmp_path):
    path = tmp_path / "queries.jsonl"
    path.write_text(
        "".join(json.dumps(row) + "\n" for row in DEMO_QUERIES), encoding="utf-8"
    )
    return path
