method sub_chain(a: int, b: int, c: int) returns (r: int)
  ensures r == a - b + c
{
  var d := a - b;
  r := d + c;
}
