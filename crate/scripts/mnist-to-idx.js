// Converts the npm `mnist` package's bundled digit data into the four
// standard IDX files (train/t10k images and labels). The package stores
// 10k digits as 3-decimal normalized floats in fixed per-class order, so
// the output is deterministic and scaling by 255 recovers the original
// bytes exactly.
//
// Usage: node mnist-to-idx.js OUT_DIR

const fs = require('fs');
const path = require('path');
const mnist = require('mnist');

const TEST_PER_CLASS = 220;
const SIZE = 28;

const outDir = process.argv[2];
if (!outDir) {
  console.error('usage: node mnist-to-idx.js OUT_DIR');
  process.exit(1);
}
fs.mkdirSync(outDir, { recursive: true });

function sampleBytes(digit, index) {
  const bytes = Buffer.alloc(SIZE * SIZE);
  const start = index * SIZE * SIZE;
  for (let i = 0; i < SIZE * SIZE; i++) {
    bytes[i] = Math.round(digit.raw[start + i] * 255);
  }
  return bytes;
}

// Round-robin over classes so any prefix of the file stays near-balanced.
function interleave(perClass) {
  const order = [];
  const next = new Array(10).fill(0);
  let remaining = perClass.reduce((acc, list) => acc + list.length, 0);
  while (remaining > 0) {
    for (let label = 0; label < 10; label++) {
      if (next[label] < perClass[label].length) {
        order.push({ label, index: perClass[label][next[label]++] });
        remaining--;
      }
    }
  }
  return order;
}

function writeIdx(name, magic, dims, payload) {
  const header = Buffer.alloc(4 + 4 * dims.length);
  header.writeUInt32BE(magic, 0);
  dims.forEach((d, i) => header.writeUInt32BE(d, 4 + 4 * i));
  fs.writeFileSync(path.join(outDir, name), Buffer.concat([header, payload]));
}

function writeSplit(prefix, order) {
  const images = Buffer.concat(order.map(({ label, index }) => sampleBytes(mnist[label], index)));
  const labels = Buffer.from(order.map(({ label }) => label));
  writeIdx(`${prefix}-images-idx3-ubyte`, 0x803, [order.length, SIZE, SIZE], images);
  writeIdx(`${prefix}-labels-idx1-ubyte`, 0x801, [order.length], labels);
}

// The last TEST_PER_CLASS samples of each class form the test pool; the
// rest (643 to 907 per class) form the training pool.
const train = [];
const test = [];
for (let label = 0; label < 10; label++) {
  const count = mnist[label].length;
  const split = count - TEST_PER_CLASS;
  train.push(Array.from({ length: split }, (_, i) => i));
  test.push(Array.from({ length: TEST_PER_CLASS }, (_, i) => split + i));
}

writeSplit('train', interleave(train));
writeSplit('t10k', interleave(test));
const trainTotal = train.reduce((a, l) => a + l.length, 0);
const testTotal = test.reduce((a, l) => a + l.length, 0);
console.log(`wrote ${trainTotal} train and ${testTotal} test images to ${outDir}`);
