// End-to-end check against the consumer: export a dataset, then feed the
// manifest to the Python auditing CLI and make sure it scores cleanly.

import { spawnSync } from 'child_process'
import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'
import { describe, expect, it } from 'vitest'

import { runExport } from '../src/export'

function havePython(): boolean {
  const probe = spawnSync('python3', ['-c', 'import greataudit'], { encoding: 'utf-8' })
  return probe.status === 0
}

describe('consumer round trip', () => {
  it.skipIf(!havePython())(
    'exported logits score without error in the auditing CLI',
    async () => {
      const out = fs.mkdtempSync(path.join(os.tmpdir(), 'logit-export-'))
      try {
        const result = await runExport({
          model: 'tiny_cnn',
          dataset: 'synthetic',
          out: path.join(out, 'export'),
          batch: 8,
          count: 40,
          seed: 11,
        })
        const proc = spawnSync(
          'python3',
          [
            '-m',
            'greataudit.cli',
            'score',
            '--dataset',
            result.manifestPath,
            '--activation',
            'softmax',
            '--output-dir',
            path.join(out, 'scored'),
          ],
          { encoding: 'utf-8' },
        )
        expect(proc.status, proc.stderr).toBe(0)
        expect(proc.stdout).toMatch(/aggregate=/)
        const profile = JSON.parse(
          fs.readFileSync(path.join(out, 'scored', 'tiny_cnn_profile.json'), 'utf-8'),
        )
        expect(profile.counts.reduce((a: number, b: number) => a + b, 0)).toBe(40)
      } finally {
        fs.rmSync(out, { recursive: true, force: true })
      }
    },
    120000,
  )
})
