import { describe, expect, test, beforeAll } from 'vitest'
import { spawnSync } from 'child_process'
import fs from 'fs'
import os from 'os'
import path from 'path'
import { exportProbabilities } from '../src/export'
import { FIXTURES_DIR } from './setup'

// Round-trip against the conformix package, through its public surfaces
// only: the dataset CSV format, the experiment config JSON, the results
// CSVs, and the installed CLI.

const tmp = fs.mkdtempSync(path.join(os.tmpdir(), 'prob-roundtrip-'))
const cnnProbs = path.join(tmp, 'cnn-probs.csv')
const mlpProbs = path.join(tmp, 'mlp-probs.csv')
const cnnLogits = path.join(tmp, 'cnn-logits.csv')

const LOAD_SNIPPET = `
import logging, sys
records = []
handler = logging.Handler()
handler.emit = records.append
logging.getLogger("conformix").addHandler(handler)
import conformix as cx
for p in sys.argv[1:]:
    ds = cx.load_dataset(p)
    warnings = sum(1 for r in records if r.levelno >= logging.WARNING)
    print(warnings, ds.renormalized_rows, ds.matrix.n_samples, ds.matrix.n_classes)
    records.clear()
`

function run(cmd: string, args: string[]) {
  const res = spawnSync(cmd, args, { encoding: 'utf8' })
  if (res.status !== 0) {
    throw new Error(`${cmd} ${args.join(' ')} exited ${res.status}\n${res.stdout}\n${res.stderr}`)
  }
  return res.stdout
}

beforeAll(async () => {
  for (const [model, out, emit] of [
    ['cnn', cnnProbs, 'probabilities'],
    ['mlp', mlpProbs, 'probabilities'],
    ['cnn', cnnLogits, 'logits'],
  ] as const) {
    await exportProbabilities({
      model: path.join(FIXTURES_DIR, `${model}.json`),
      dataset: 'stripes',
      split: 'test',
      out,
      emit,
      batchSize: 100,
    })
  }
})

describe('conformix round-trip', () => {
  test('exports load under load_dataset with zero warnings', () => {
    const out = run('python3', ['-c', LOAD_SNIPPET, cnnProbs, mlpProbs]).trim().split('\n')
    expect(out).toEqual(['0 0 500 6', '0 0 500 6'])
  })

  test('model-weighting run completes and the weighted size wins on the selection set', () => {
    const config = {
      datasets: [cnnProbs, mlpProbs],
      scores: ['aps'],
      methods: ['vfcp', 'efcp'],
      alphas: [0.1],
      n_runs: 5,
      grid_epsilon: 0.05,
      train_test_ratio: 0.8,
      vfcp_ratio: 0.5,
      seed: 7,
      output_dir: path.join(tmp, 'weighting'),
    }
    const cfgPath = path.join(tmp, 'weighting.json')
    fs.writeFileSync(cfgPath, JSON.stringify(config, null, 2))
    run('conformix', ['run', cfgPath, '--no-figures'])

    const lines = fs
      .readFileSync(path.join(tmp, 'weighting', 'selections.csv'), 'utf8')
      .trim()
      .split('\n')
    expect(lines[0]).toBe('method,alpha,seed,weight,selection_size,best_vertex_size,argmin_ties')
    const rows = lines.slice(1).map(line => line.split(','))
    expect(rows.length).toBe(2 * 5)
    for (const row of rows) {
      const weight = row[3].split('|')
      expect(weight.length).toBe(2)
      const selectionSize = Number(row[4])
      const bestSingleModelSize = Number(row[5])
      expect(selectionSize).toBeLessThanOrEqual(bestSingleModelSize)
    }
  })

  test('logits export feeds the primary CLI without error', () => {
    const config = {
      datasets: [cnnLogits],
      scores: ['thr', 'aps', 'rank'],
      methods: ['vfcp'],
      alphas: [0.1],
      n_runs: 2,
      grid_epsilon: 0.25,
      train_test_ratio: 0.8,
      vfcp_ratio: 0.5,
      seed: 3,
      output_dir: path.join(tmp, 'logits'),
    }
    const cfgPath = path.join(tmp, 'logits.json')
    fs.writeFileSync(cfgPath, JSON.stringify(config, null, 2))
    run('conformix', ['run', cfgPath, '--no-figures'])

    const summary = fs.readFileSync(path.join(tmp, 'logits', 'summary.csv'), 'utf8')
    const lines = summary.trim().split('\n')
    expect(lines[0]).toBe('method,alpha,coverage_mean,coverage_std,size_mean,size_std,n_runs')
    expect(lines.length).toBe(2)
    const coverage = Number(lines[1].split(',')[2])
    expect(coverage).toBeGreaterThan(0.8)
  })
})
